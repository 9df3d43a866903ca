use serde::Serialize;

use super::exact::{check_q1_ll_q0, ppm_block_llr_law_with_cap};
use super::score::ScoreA;
use crate::dmc_core::{
    iid_sum_distribution_with_cap, BinaryDmc, SumDistribution, DEFAULT_TYPE_CLASS_CAP,
};
use crate::error::{Error, Result};

/// Moments of `B = (1/m)ΣA(Z_j)` and `C = log(1 + B)` for one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSet {
    pub e_b: f64,
    pub e_b2: f64,
    pub e_b3: f64,
    pub e_b4: f64,
    pub e_c: f64,
    pub var_c: f64,
    pub third_abs_c: f64,
}

impl MomentSet {
    fn gap(&self, other: &Self) -> Self {
        Self {
            e_b: self.e_b - other.e_b,
            e_b2: self.e_b2 - other.e_b2,
            e_b3: self.e_b3 - other.e_b3,
            e_b4: self.e_b4 - other.e_b4,
            e_c: self.e_c - other.e_c,
            var_c: self.var_c - other.var_c,
            third_abs_c: self.third_abs_c - other.third_abs_c,
        }
    }
}

/// Window moments under `Q₀^⊗m` (`q0`) and under the PPM window law `P_Z^{m,1}` (`ppm`).
///
/// * `exact_*`: type enumeration.
/// * `closed_*`: exact polynomial identities for `B` and leading terms for `C`, with
///   `E[C] = ∓χ²/(2m)` (negative under `Q₀`, positive under PPM), `E[B⁴] ≈ 3χ²²/m²` and the
///   third absolute moment bounded through `(E[(C − EC)⁴])^{3/4} ≈ (3χ²²/m²)^{3/4}`.
/// * `stated_*`: the leading terms as usually displayed for this lemma: `E[C] = +χ²/(2m)` for
///   both laws, `E[B⁴] ≈ χ²²/m²`, third absolute moment `≤ (χ²/m)^{3/2}`, and `0` for the
///   `O(1/m²)` third moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PpmMoments {
    pub m: usize,
    pub chi2: f64,
    pub exact_q0: MomentSet,
    pub exact_ppm: MomentSet,
    pub closed_q0: MomentSet,
    pub closed_ppm: MomentSet,
    pub stated_q0: MomentSet,
    pub stated_ppm: MomentSet,
}

impl PpmMoments {
    /// `exact − closed` under `Q₀`.
    pub fn gap_q0(&self) -> MomentSet {
        self.exact_q0.gap(&self.closed_q0)
    }

    pub fn gap_ppm(&self) -> MomentSet {
        self.exact_ppm.gap(&self.closed_ppm)
    }

    pub fn stated_gap_q0(&self) -> MomentSet {
        self.exact_q0.gap(&self.stated_q0)
    }

    pub fn stated_gap_ppm(&self) -> MomentSet {
        self.exact_ppm.gap(&self.stated_ppm)
    }
}

/// Raw moments `E[B^k]`, `k = 1..4`, in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct BMoments {
    pub q0: [f64; 4],
    pub ppm: [f64; 4],
}

/// With `a_k = E_{Q₀}[A^k]`, `b_k = E_{Q₁}[A^k]` (`a_1 = 0`, `a_2 = b_1 = χ²`), `S = ΣA(Z_j)`
/// and `S' ` the sum over the `m − 1` pulse-free positions:
/// `E S⁴ = m a₄ + 3m(m−1)a₂²`, and for the PPM window `S = A(Z₁) + S'` with `Z₁ ~ Q₁`.
pub(crate) fn closed_form_b_moments(willie: &BinaryDmc, m: usize) -> BMoments {
    let a = ScoreA::new(willie);
    let ak = |k| a.moment(willie, 0, k);
    let bk = |k| a.moment(willie, 1, k);
    let (a2, a3, a4) = (ak(2), ak(3), ak(4));
    let (b1, b2, b3, b4) = (bk(1), bk(2), bk(3), bk(4));
    let mf = m as f64;
    let r = mf - 1.0;
    let q0 = [
        0.0,
        a2 / mf,
        a3 / mf.powi(2),
        (mf * a4 + 3.0 * mf * r * a2 * a2) / mf.powi(4),
    ];
    let s2 = r * a2;
    let s3 = r * a3;
    let s4 = r * a4 + 3.0 * r * (r - 1.0) * a2 * a2;
    let ppm = [
        b1 / mf,
        (b2 + s2) / mf.powi(2),
        (b3 + 3.0 * b1 * s2 + s3) / mf.powi(3),
        (b4 + 6.0 * b2 * s2 + 4.0 * b1 * s3 + s4) / mf.powi(4),
    ];
    BMoments { q0, ppm }
}

fn moment_set(b: &SumDistribution, c: &SumDistribution, m: f64) -> MomentSet {
    MomentSet {
        e_b: b.expect(|s| s / m),
        e_b2: b.expect(|s| (s / m).powi(2)),
        e_b3: b.expect(|s| (s / m).powi(3)),
        e_b4: b.expect(|s| (s / m).powi(4)),
        e_c: c.mean(),
        var_c: c.variance(),
        third_abs_c: c.central_abs_moment(3),
    }
}

pub fn ppm_moments(willie: &BinaryDmc, m: usize) -> Result<PpmMoments> {
    ppm_moments_with_cap(willie, m, DEFAULT_TYPE_CLASS_CAP)
}

pub fn ppm_moments_with_cap(willie: &BinaryDmc, m: usize, cap: u128) -> Result<PpmMoments> {
    check_q1_ll_q0(willie)?;
    if !willie.w0_ll_w1() {
        return Err(Error::AbsoluteContinuityViolation("Q₀ ≪ Q₁ fails".into()));
    }
    let a = ScoreA::new(willie);
    let chi2 = a.moment(willie, 0, 2);
    let mf = m as f64;

    let s_q0 = iid_sum_distribution_with_cap(a.values(), willie.w0(), m, cap)?;
    let rest = iid_sum_distribution_with_cap(a.values(), willie.w0(), m - 1, cap)?;
    let mut tilted = Vec::new();
    for (z, &q1) in willie.w1().probs().iter().enumerate() {
        for &(s, p) in rest.atoms() {
            tilted.push((a.values()[z] + s, q1 * p));
        }
    }
    let s_ppm = SumDistribution::from_atoms(tilted, m);
    let law = ppm_block_llr_law_with_cap(willie, m, cap)?;
    let exact_q0 = moment_set(&s_q0, &law.under_q0, mf);
    let exact_ppm = moment_set(&s_ppm, &law.under_ppm, mf);

    let b = closed_form_b_moments(willie, m);
    let c_var = chi2 / mf;
    let jensen = (3.0 * chi2 * chi2 / (mf * mf)).powf(0.75);
    let closed = |raw: [f64; 4], e_c: f64| MomentSet {
        e_b: raw[0],
        e_b2: raw[1],
        e_b3: raw[2],
        e_b4: raw[3],
        e_c,
        var_c: c_var,
        third_abs_c: jensen,
    };
    let stated = |e_b: f64| MomentSet {
        e_b,
        e_b2: chi2 / mf,
        e_b3: 0.0,
        e_b4: chi2 * chi2 / (mf * mf),
        e_c: chi2 / (2.0 * mf),
        var_c: c_var,
        third_abs_c: c_var.powf(1.5),
    };
    Ok(PpmMoments {
        m,
        chi2,
        exact_q0,
        exact_ppm,
        closed_q0: closed(b.q0, -chi2 / (2.0 * mf)),
        closed_ppm: closed(b.ppm, chi2 / (2.0 * mf)),
        stated_q0: stated(0.0),
        stated_ppm: stated(chi2 / mf),
    })
}

/// Stability of `K_m = gap_m · m^k` across window sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderFit {
    pub order: f64,
    pub constants: Vec<(usize, f64)>,
    /// Least-squares slope of `log|K_m|` against `log m`.
    pub slope: f64,
    /// `|slope| ≤ 0.5`, or every gap below `1e-13`.
    pub stable: bool,
}

pub fn fit_order(gaps: &[(usize, f64)], order: f64) -> OrderFit {
    let constants: Vec<(usize, f64)> = gaps
        .iter()
        .map(|&(m, g)| (m, g * (m as f64).powf(order)))
        .collect();
    if gaps.iter().all(|&(_, g)| g.abs() < 1e-13) {
        return OrderFit {
            order,
            constants,
            slope: 0.0,
            stable: true,
        };
    }
    let pts: Vec<(f64, f64)> = constants
        .iter()
        .map(|&(m, k)| ((m as f64).ln(), k.abs().max(1e-300).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    OrderFit {
        order,
        constants,
        slope,
        stable: slope.abs() <= 0.5,
    }
}
