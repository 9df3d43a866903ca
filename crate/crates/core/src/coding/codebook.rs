use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ppm::{sample_ppm_with, PpmParams};

/// `K` sub-codes of `M` binary codewords each, every codeword stored as its sorted 1-based
/// pulse positions. Sub-code `s` is the code used under key `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Codebook {
    n: usize,
    ell: usize,
    keys: Vec<Vec<Vec<usize>>>,
}

impl Codebook {
    /// `ell` is the nominal pulse count written in the text header.
    pub fn new(n: usize, ell: usize, keys: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let m = keys.first().map_or(0, |k| k.len());
        if keys.is_empty() || m == 0 {
            return Err(Error::InvalidParams("a codebook needs M·K ≥ 1".into()));
        }
        if keys.iter().any(|k| k.len() != m) {
            return Err(Error::InvalidParams("sub-codes differ in size".into()));
        }
        for x in keys.iter().flatten() {
            if x.windows(2).any(|w| w[0] >= w[1]) || x.iter().any(|&i| i == 0 || i > n) {
                return Err(Error::InvalidParams(format!(
                    "bad pulse list {x:?} for n = {n}"
                )));
            }
        }
        Ok(Self { n, ell, keys })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Messages per key.
    pub fn m(&self) -> usize {
        self.keys[0].len()
    }

    /// Number of keys.
    pub fn k(&self) -> usize {
        self.keys.len()
    }

    pub fn subcode(&self, s: usize) -> &[Vec<usize>] {
        &self.keys[s]
    }

    pub fn codeword(&self, s: usize, w: usize) -> &[usize] {
        &self.keys[s][w]
    }

    /// All `MK` codewords, key-major.
    pub fn codewords(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.keys.iter().flatten()
    }

    /// The common weight if every codeword has the same number of pulses.
    pub fn constant_composition(&self) -> Option<usize> {
        let w = self.keys[0][0].len();
        self.codewords().all(|x| x.len() == w).then_some(w)
    }

    pub fn min_weight(&self) -> usize {
        self.codewords().map(Vec::len).min().unwrap_or(0)
    }

    /// Header `n,M,K,ell`, then one codeword per line (key-major) as comma-separated pulse
    /// positions; the all-zero codeword is an empty line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{},{},{},{}\n", self.n, self.m(), self.k(), self.ell);
        for x in self.codewords() {
            let line: Vec<String> = x.iter().map(|i| i.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::ConfigError(format!("codebook file: {msg}"));
        let mut lines = text.lines();
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("empty".into()))?
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<usize>()
                    .map_err(|e| bad(format!("header: {e}")))
            })
            .collect::<Result<_>>()?;
        let [n, m, k, ell] = header[..] else {
            return Err(bad("header must be n,M,K,ell".into()));
        };
        let mut words = Vec::with_capacity(m * k);
        for line in lines.take(m * k) {
            let line = line.trim();
            let x = if line.is_empty() {
                Vec::new()
            } else {
                line.split(',')
                    .map(|f| f.trim().parse::<usize>().map_err(|e| bad(format!("{e}"))))
                    .collect::<Result<Vec<_>>>()?
            };
            words.push(x);
        }
        if words.len() != m * k {
            return Err(bad(format!(
                "expected {} codewords, found {}",
                m * k,
                words.len()
            )));
        }
        let keys = words.chunks(m.max(1)).map(|c| c.to_vec()).collect();
        Self::new(n, ell, keys)
    }
}

/// `MK` i.i.d. `(n, ℓ)`-PPM codewords drawn from one ChaCha stream seeded by `seed`.
pub fn generate_codebook(params: &PpmParams, m: usize, k: usize, seed: u64) -> Result<Codebook> {
    if m == 0 || k == 0 {
        return Err(Error::InvalidParams(format!(
            "need M·K ≥ 1, got M = {m}, K = {k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys = (0..k)
        .map(|_| (0..m).map(|_| sample_ppm_with(params, &mut rng)).collect())
        .collect();
    Codebook::new(params.n, params.ell, keys)
}

/// A codebook padded with all-zero codewords and the resulting guarantees: if the original
/// code has average error `ε′` and divergence `δ′`, the padded one has average error at most
/// `(ε′ + a)/(1 + a)` and divergence at most `δ′/(1 + a)`, with `a = N/M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DilutedCodebook {
    pub codebook: Codebook,
    /// Zero codewords added per key.
    pub added: usize,
    /// `a = N/M`.
    pub alpha_eff: f64,
}

impl DilutedCodebook {
    pub fn predicted_error(&self, eps_prime: f64) -> f64 {
        (eps_prime + self.alpha_eff) / (1.0 + self.alpha_eff)
    }

    pub fn predicted_divergence(&self, delta_prime: f64) -> f64 {
        delta_prime / (1.0 + self.alpha_eff)
    }
}

/// Appends `N = ⌈αM⌉` all-zero codewords to every sub-code.
pub fn dilute_codebook(codebook: &Codebook, alpha: f64) -> Result<DilutedCodebook> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParams(format!("dilution fraction {alpha}")));
    }
    let m = codebook.m();
    let added = (alpha * m as f64).ceil() as usize;
    let keys = codebook
        .keys
        .iter()
        .map(|sub| {
            let mut sub = sub.clone();
            sub.extend(std::iter::repeat_with(Vec::new).take(added));
            sub
        })
        .collect();
    Ok(DilutedCodebook {
        codebook: Codebook::new(codebook.n, codebook.ell, keys)?,
        added,
        alpha_eff: added as f64 / m as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppm::make_ppm;

    #[test]
    fn generation_is_reproducible_and_constant_composition() {
        let p = make_ppm(20, 4).unwrap();
        let a = generate_codebook(&p, 8, 3, 5).unwrap();
        assert_eq!(a, generate_codebook(&p, 8, 3, 5).unwrap());
        assert_ne!(a, generate_codebook(&p, 8, 3, 6).unwrap());
        assert_eq!(a.constant_composition(), Some(4));
        assert_eq!((a.m(), a.k()), (8, 3));
        let one = generate_codebook(&p, 1, 1, 0).unwrap();
        assert_eq!(one.codeword(0, 0).len(), 4);
        assert!(generate_codebook(&p, 0, 1, 0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let p = make_ppm(9, 3).unwrap();
        let c = generate_codebook(&p, 4, 2, 11).unwrap();
        let d = dilute_codebook(&c, 0.5).unwrap();
        let text = d.codebook.to_text();
        assert!(text.starts_with("9,6,2,3\n"));
        assert_eq!(Codebook::from_text(&text).unwrap(), d.codebook);
        assert!(Codebook::from_text("3,1,1\n1\n").is_err());
        assert!(Codebook::from_text("3,1,1,1\n4\n").is_err());
    }

    #[test]
    fn dilution() {
        let p = make_ppm(6, 2).unwrap();
        let c = generate_codebook(&p, 4, 1, 2).unwrap();
        assert_eq!(dilute_codebook(&c, 0.0).unwrap().codebook, c);
        let d = dilute_codebook(&c, 1.0).unwrap();
        assert_eq!(d.added, 4);
        assert_eq!(d.codebook.constant_composition(), None);
        assert!((d.predicted_error(0.5) - 0.75).abs() < 1e-15);
    }
}
