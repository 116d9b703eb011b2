//! Loss-of-heterozygosity frequency model: a binomial / beta-binomial mixture
//! over per-location counts, sampled in a transformed space
//! `v = (logit η, logit π₁, logit π₂, γ)` with flat priors.

use std::io::{BufRead, Write};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{log_add_exp, Scalar};
use crate::targets::Target;

/// Half-width of the uniform prior on γ.
pub const LOH_GAMMA_BOUND: f64 = 30.0;

/// Synthetic stand-in data set shipped with the crate (`x,n` CSV, 40 rows).
pub const BUNDLED_LOH_CSV: &str = include_str!("../../data/loh_synthetic.csv");

/// Seed and generating parameters of the bundled stand-in.
pub const SYNTHETIC_SEED: u64 = 40;
const SYNTHETIC_PARAMS: [f64; 4] = [0.840, 0.276, 0.690, 10.336];
const SYNTHETIC_N_RANGE: (u32, u32) = (10, 40);
const SYNTHETIC_RECORDS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LohRecord {
    pub x: u32,
    pub n: u32,
}

#[derive(Clone, Debug)]
pub struct LohSpec {
    records: Vec<LohRecord>,
    ln_choose: Vec<f64>,
}

impl LohSpec {
    pub fn new(records: Vec<LohRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidData("LOH data set is empty".into()));
        }
        if let Some((i, r)) = records.iter().enumerate().find(|(_, r)| r.x > r.n) {
            return Err(Error::InvalidData(format!(
                "record {}: x = {} exceeds n = {}",
                i + 1,
                r.x,
                r.n
            )));
        }
        let ln_choose = records.iter().map(|r| ln_choose(r.n, r.x)).collect();
        Ok(LohSpec { records, ln_choose })
    }

    /// The bundled synthetic data set.
    pub fn bundled() -> Self {
        let records = read_loh_csv(BUNDLED_LOH_CSV.as_bytes()).expect("bundled LOH csv parses");
        Self::new(records).expect("bundled LOH data valid")
    }

    pub fn records(&self) -> &[LohRecord] {
        &self.records
    }

    fn log_posterior_unchecked<T: Scalar>(&self, v: &[T]) -> T {
        let gamma = v[3];
        if !(gamma.abs() <= T::cst(LOH_GAMMA_BOUND)) {
            return T::neg_infinity();
        }
        // ln u = -softplus(-v), ln(1-u) = -softplus(v)
        let ln_eta = -(-v[0]).softplus();
        let ln_eta_c = -v[0].softplus();
        let (ln_p1, ln_p1_c) = (-(-v[1]).softplus(), -v[1].softplus());
        let pi2 = v[2].logistic();
        let jacobian: T = v[..3]
            .iter()
            .map(|&t| -(-t).softplus() - t.softplus())
            .sum();

        let mut total = jacobian;
        for (r, &lc) in self.records.iter().zip(&self.ln_choose) {
            let lc = T::cst(lc);
            let binom = lc + binom_kernel(r.x, r.n, ln_p1, ln_p1_c);
            let bb = lc + betabinom_kernel(r.x, r.n, pi2, gamma);
            total += log_add_exp(ln_eta + binom, ln_eta_c + bb);
        }
        total
    }
}

fn ln_choose(n: u32, x: u32) -> f64 {
    let f = |k: u32| (k as f64 + 1.0).lgamma();
    f(n) - f(x) - f(n - x)
}

fn binom_kernel<T: Scalar>(x: u32, n: u32, ln_p: T, ln_q: T) -> T {
    let mut v = T::zero();
    if x > 0 {
        v += T::from_count(x as usize) * ln_p;
    }
    if n > x {
        v += T::from_count((n - x) as usize) * ln_q;
    }
    v
}

/// `ln[B(x+a, n-x+b) / B(a,b)]` with `a = π e^{-γ}`, `b = (1-π) e^{-γ}`, as a
/// sum of log-ratios of rising factorials so neither tiny nor huge shape
/// parameters lose precision.
fn betabinom_kernel<T: Scalar>(x: u32, n: u32, pi: T, gamma: T) -> T {
    let r = (-gamma).exp();
    let a = pi * r;
    let b = (T::one() - pi) * r;
    let mut v = T::zero();
    for i in 0..x {
        let i = T::from_count(i as usize);
        v += ((a + i) / (r + i)).ln();
    }
    let xs = T::from_count(x as usize);
    for j in 0..(n - x) {
        let j = T::from_count(j as usize);
        v += ((b + j) / (r + xs + j)).ln();
    }
    v
}

fn check_probability<T: Scalar>(name: &str, p: T) -> Result<()> {
    if p > T::zero() && p < T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {p} not in (0,1)")))
    }
}

pub fn binom_logpmf<T: Scalar>(x: u32, n: u32, p: T) -> Result<T> {
    if x > n {
        return Err(Error::Domain(format!("x = {x} exceeds n = {n}")));
    }
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::Domain(format!("p = {p} not in [0,1]")));
    }
    Ok(T::cst(ln_choose(n, x)) + binom_kernel(x, n, p.ln(), (T::one() - p).ln()))
}

/// Beta-binomial log-pmf with mean `n π₂` and overdispersion `ω = logistic(γ)`;
/// tends to the binomial as `γ → -∞`.
pub fn betabinom_logpmf<T: Scalar>(x: u32, n: u32, pi2: T, gamma: T) -> Result<T> {
    if x > n {
        return Err(Error::Domain(format!("x = {x} exceeds n = {n}")));
    }
    check_probability("pi2", pi2)?;
    if !gamma.is_finite() {
        return Err(Error::Domain(format!("gamma = {gamma} not finite")));
    }
    Ok(T::cst(ln_choose(n, x)) + betabinom_kernel(x, n, pi2, gamma))
}

/// Log posterior (up to a constant) in the transformed space, including the
/// logistic Jacobians of the first three coordinates.
pub fn loh_log_posterior<T: Scalar>(v: &[T], spec: &LohSpec) -> Result<T> {
    Error::check_dim(4, v.len())?;
    Ok(spec.log_posterior_unchecked(v))
}

impl<T: Scalar> Target<T> for LohSpec {
    fn dim(&self) -> usize {
        4
    }
    fn log_density(&self, x: &[T]) -> T {
        self.log_posterior_unchecked(x)
    }
    fn to_natural(&self, x: &[T]) -> Vec<T> {
        vec![x[0].logistic(), x[1].logistic(), x[2].logistic(), x[3]]
    }
    fn coord_names(&self) -> Vec<String> {
        ["eta", "pi1", "pi2", "gamma"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }
}

/// Parses the `x,n` CSV format (header required).
pub fn read_loh_csv<R: BufRead>(reader: R) -> Result<Vec<LohRecord>> {
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h.trim() == "x,n" => {}
        Some((_, Ok(h))) => {
            return Err(Error::InvalidData(format!(
                "line 1: expected header `x,n`, found `{h}`"
            )))
        }
        Some((_, Err(e))) => return Err(e.into()),
        None => return Err(Error::InvalidData("empty LOH file".into())),
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let mut fields = line.split(',');
        let mut field = |name: &str| -> Result<u32> {
            let raw = fields.next().ok_or_else(|| {
                Error::InvalidData(format!("line {lineno}: missing column {name}"))
            })?;
            raw.trim().parse().map_err(|_| {
                Error::InvalidData(format!(
                    "line {lineno}: column {name} `{raw}` is not a count"
                ))
            })
        };
        let x = field("x")?;
        let n = field("n")?;
        if fields.next().is_some() {
            return Err(Error::InvalidData(format!(
                "line {lineno}: expected two columns"
            )));
        }
        if x > n {
            return Err(Error::InvalidData(format!(
                "line {lineno}: x = {x} exceeds n = {n}"
            )));
        }
        records.push(LohRecord { x, n });
    }
    Ok(records)
}

pub fn write_loh_csv<W: Write>(mut w: W, records: &[LohRecord]) -> Result<()> {
    w.write_all(b"x,n\n")?;
    for r in records {
        writeln!(w, "{},{}", r.x, r.n)?;
    }
    Ok(())
}

fn draw_from_log_pmf(log_pmf: impl Fn(u32) -> f64, n: u32, rng: &mut dyn RngCore) -> u32 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for x in 0..=n {
        acc += log_pmf(x).exp();
        if u < acc {
            return x;
        }
    }
    n
}

/// Regenerates the bundled stand-in: 40 records drawn from the mixture model
/// at `η = 0.840, π₁ = 0.276, π₂ = 0.690, γ = 10.336`, sample sizes uniform
/// on 10..=40.
pub fn synthetic_loh_records(seed: u64) -> Vec<LohRecord> {
    let [eta, pi1, pi2, gamma] = SYNTHETIC_PARAMS;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..SYNTHETIC_RECORDS)
        .map(|_| {
            let n = rng.random_range(SYNTHETIC_N_RANGE.0..=SYNTHETIC_N_RANGE.1);
            let binomial_group = rng.random::<f64>() < eta;
            let x = if binomial_group {
                draw_from_log_pmf(|x| binom_logpmf(x, n, pi1).unwrap(), n, &mut rng)
            } else {
                draw_from_log_pmf(|x| betabinom_logpmf(x, n, pi2, gamma).unwrap(), n, &mut rng)
            };
            LohRecord { x, n }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(x: u32, n: u32) -> LohRecord {
        LohRecord { x, n }
    }

    #[test]
    fn gamma_outside_prior_is_impossible() {
        let spec = LohSpec::new(vec![rec(2, 5), rec(0, 7)]).unwrap();
        assert_eq!(
            loh_log_posterior(&[0.0, 0.0, 0.0, 31.0], &spec).unwrap(),
            f64::NEG_INFINITY
        );
        assert_eq!(
            loh_log_posterior(&[0.0, 0.0, 0.0, -30.5], &spec).unwrap(),
            f64::NEG_INFINITY
        );
        assert!(loh_log_posterior(&[0.0f64, 0.0, 0.0, 30.0], &spec)
            .unwrap()
            .is_finite());
    }

    #[test]
    fn binomial_limit_isolates_first_group() {
        let spec = LohSpec::new(vec![rec(2, 5)]).unwrap();
        let (l_eta, l_p1) = (40.0f64, 0.3f64);
        let p1 = 1.0 / (1.0 + (-l_p1).exp());
        let v = [l_eta, l_p1, -0.4, 3.0];
        // ln u + ln(1-u) = -t - 2 ln(1 + e^{-t})
        let jac = |t: f64| -t - 2.0 * (-t).exp().ln_1p();
        let direct =
            10f64.ln() + 2.0 * p1.ln() + 3.0 * (1.0 - p1).ln() + jac(l_eta) + jac(l_p1) + jac(-0.4);
        assert!((loh_log_posterior(&v, &spec).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn logistic_jacobian_at_center() {
        // with a single empty record the likelihood is 1, leaving the three Jacobians
        let spec = LohSpec::new(vec![rec(0, 0)]).unwrap();
        let v = loh_log_posterior(&[0.0f64, 0.0, 0.0, 0.0], &spec).unwrap();
        assert!((v - 3.0 * 0.25f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn invalid_records_rejected() {
        assert!(LohSpec::new(vec![rec(6, 5)]).is_err());
        assert!(LohSpec::new(vec![]).is_err());
        assert!(betabinom_logpmf(6, 5, 0.3f64, 0.0).is_err());
        assert!(betabinom_logpmf(1, 5, 1.0f64, 0.0).is_err());
    }

    #[test]
    fn betabinom_normalizes() {
        let total: f64 = (0..=10)
            .map(|x| betabinom_logpmf(x, 10, 0.3f64, 0.0).unwrap().exp())
            .sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn betabinom_binomial_limit() {
        let tv: f64 = (0..=10)
            .map(|x| {
                let bb = betabinom_logpmf(x, 10, 0.3f64, -30.0).unwrap().exp();
                let bin = binom_logpmf(x, 10, 0.3f64).unwrap().exp();
                (bb - bin).abs()
            })
            .sum::<f64>()
            * 0.5;
        assert!(tv < 1e-4);
    }

    #[test]
    fn betabinom_mean_identity() {
        let mean: f64 = (0..=12)
            .map(|x| x as f64 * betabinom_logpmf(x, 12, 0.6f64, 1.0).unwrap().exp())
            .sum();
        assert!((mean - 12.0 * 0.6).abs() < 1e-8);
    }

    #[test]
    fn betabinom_matches_log_gamma_form_at_moderate_gamma() {
        // independent route: Beta functions through ln Γ
        let (n, pi, gamma) = (9u32, 0.35f64, 0.7f64);
        let w = 1.0 / (1.0 + (-gamma).exp());
        let a = pi * (1.0 - w) / w;
        let b = (1.0 - pi) * (1.0 - w) / w;
        let lbeta = |p: f64, q: f64| p.lgamma() + q.lgamma() - (p + q).lgamma();
        for x in 0..=n {
            let lc = ((n + 1) as f64).lgamma()
                - ((x + 1) as f64).lgamma()
                - ((n - x + 1) as f64).lgamma();
            let direct = lc + lbeta(x as f64 + a, (n - x) as f64 + b) - lbeta(a, b);
            assert!((betabinom_logpmf(x, n, pi, gamma).unwrap() - direct).abs() < 1e-11);
        }
    }

    #[test]
    fn permutation_invariant() {
        let recs = vec![rec(2, 5), rec(9, 10), rec(0, 13), rec(4, 4)];
        let mut rev = recs.clone();
        rev.reverse();
        let v = [0.7f64, -1.1, 0.9, 4.0];
        let a = loh_log_posterior(&v, &LohSpec::new(recs).unwrap()).unwrap();
        let b = loh_log_posterior(&v, &LohSpec::new(rev).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let recs = vec![rec(1, 3), rec(0, 12)];
        let mut buf = Vec::new();
        write_loh_csv(&mut buf, &recs).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "x,n\n1,3\n0,12\n");
        assert_eq!(read_loh_csv(buf.as_slice()).unwrap(), recs);

        let bad_header = read_loh_csv("n,x\n1,2\n".as_bytes()).unwrap_err();
        assert!(bad_header.to_string().contains("line 1"));
        let bad_row = read_loh_csv("x,n\n1,2\n5,3\n".as_bytes()).unwrap_err();
        assert!(bad_row.to_string().contains("line 3"));
        assert!(read_loh_csv("x,n\n1,two\n".as_bytes()).is_err());
    }

    #[test]
    fn bundled_file_matches_generator() {
        let recs = synthetic_loh_records(SYNTHETIC_SEED);
        assert_eq!(recs.len(), 40);
        let mut buf = Vec::new();
        write_loh_csv(&mut buf, &recs).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), BUNDLED_LOH_CSV);
        assert_eq!(LohSpec::bundled().records(), recs.as_slice());
    }
}
