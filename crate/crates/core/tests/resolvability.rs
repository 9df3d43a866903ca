use covert::coding::{
    generate_codebook, induced_output_distribution, log_inv_mu_n, resolvability_expectation_bound,
};
use covert::dmc_core::{kl_divergence, total_variation, BinaryDmc};
use covert::ppm::{make_ppm, ppm_output_distribution};

const CODEBOOKS: u64 = 200;

#[test]
fn mean_kl_of_random_ppm_codebooks_is_below_the_expectation_bound() {
    let willie = BinaryDmc::bsc(0.45).unwrap();
    let params = make_ppm(8, 2).unwrap();
    let (m, k) = (16, 4);
    let pz = ppm_output_distribution(&willie, &params).unwrap();
    let (mut kl, mut tv) = (Vec::new(), Vec::new());
    for seed in 0..CODEBOOKS {
        let cb = generate_codebook(&params, m, k, 1000 + seed).unwrap();
        let p = induced_output_distribution(&cb, &willie).unwrap();
        kl.push(kl_divergence(&p, &pz).unwrap());
        tv.push(total_variation(&p, &pz).unwrap());
    }
    let n = CODEBOOKS as f64;
    let mean = kl.iter().sum::<f64>() / n;
    let sd = (kl.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let log_mk = ((m * k) as f64).ln();
    let log_inv_mu = log_inv_mu_n(&willie, params.n);
    let bound = (0..=200)
        .map(|j| {
            resolvability_expectation_bound(j as f64 * 0.05, log_mk, log_inv_mu, &willie, &params)
                .unwrap()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(
        mean + 1.96 * sd / n.sqrt() <= bound,
        "mean {mean} sd {sd} bound {bound}"
    );
    for (d, v) in kl.iter().zip(&tv) {
        assert!(*v <= (d / 2.0).sqrt() + 1e-12, "Pinsker: tv {v} kl {d}");
    }
}

#[test]
fn a_codebook_holding_the_whole_support_resolves_exactly() {
    let willie = BinaryDmc::bsc(0.3).unwrap();
    let params = make_ppm(4, 2).unwrap();
    let words: Vec<Vec<usize>> = vec![vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4]];
    let cb = covert::coding::Codebook::new(4, 2, vec![words]).unwrap();
    let p = induced_output_distribution(&cb, &willie).unwrap();
    let pz = ppm_output_distribution(&willie, &params).unwrap();
    assert!(kl_divergence(&p, &pz).unwrap().abs() < 1e-14);
}
