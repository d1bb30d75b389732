//! Shot-by-shot photon-number triplets and their lagged correlation.
//!
//! Per shot a primary pair number `M` is drawn; each pair either stays a
//! 1–3 pair or has its idler upconverted into field 2, so `N₁ = N₂ + N₃`
//! holds exactly before detection. Detection is binomial thinning plus
//! Poisson background.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shots per independently seeded RNG stream.
pub const CHUNK_SHOTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PairStatistics {
    Poisson,
    /// Single-mode thermal (Bose–Einstein).
    Thermal,
    /// `modes` independent thermal modes sharing the mean.
    Multithermal {
        modes: f64,
    },
}

impl PairStatistics {
    /// Variance of the pair number at mean `mu`.
    pub fn variance(&self, mu: f64) -> f64 {
        match *self {
            PairStatistics::Poisson => mu,
            PairStatistics::Thermal => mu + mu * mu,
            PairStatistics::Multithermal { modes } => mu + mu * mu / modes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripletModel {
    pub mean_pairs: f64,
    pub pair_statistics: PairStatistics,
    /// Probability that a field-3 photon is upconverted into field 2.
    pub conversion_prob: f64,
    pub efficiencies: [f64; 3],
    /// Mean spurious counts per shot in each arm.
    pub background: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletRecord {
    pub shot: u64,
    pub m1: u64,
    pub m2: u64,
    pub m3: u64,
}

impl TripletModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidSpec(what));
        if !(self.mean_pairs >= 0.0 && self.mean_pairs.is_finite()) {
            return bad(format!("mean_pairs must be finite and ≥ 0, got {}", self.mean_pairs));
        }
        if !(0.0..=1.0).contains(&self.conversion_prob) {
            return bad(format!("conversion_prob {} outside [0, 1]", self.conversion_prob));
        }
        for (j, &eta) in self.efficiencies.iter().enumerate() {
            if !(0.0..=1.0).contains(&eta) {
                return bad(format!("efficiency η{} = {eta} outside [0, 1]", j + 1));
            }
        }
        for (j, &b) in self.background.iter().enumerate() {
            if !(b >= 0.0 && b.is_finite()) {
                return bad(format!("background b{} = {b} must be finite and ≥ 0", j + 1));
            }
        }
        if let PairStatistics::Multithermal { modes } = self.pair_statistics {
            if !(modes >= 1.0 && modes.is_finite()) {
                return bad(format!("multithermal mode count {modes} must be ≥ 1"));
            }
        }
        Ok(())
    }

    fn draw_pairs<R: Rng>(&self, rng: &mut R) -> u64 {
        let mu = self.mean_pairs;
        let intensity = match self.pair_statistics {
            PairStatistics::Poisson => mu,
            PairStatistics::Thermal => gamma_draw(rng, 1.0, mu),
            PairStatistics::Multithermal { modes } => gamma_draw(rng, modes, mu / modes),
        };
        poisson_draw(rng, intensity)
    }

    fn shot<R: Rng>(&self, rng: &mut R, shot: u64) -> TripletRecord {
        let m = self.draw_pairs(rng);
        let n2 = binomial_draw(rng, m, self.conversion_prob);
        let n = [m, n2, m - n2];
        let [m1, m2, m3]: [u64; 3] = std::array::from_fn(|j| {
            binomial_draw(rng, n[j], self.efficiencies[j]) + poisson_draw(rng, self.background[j])
        });
        TripletRecord { shot, m1, m2, m3 }
    }

    /// Closed-form `Γ(0)` of this model.
    pub fn expected_epsilon(&self) -> f64 {
        let mu = self.mean_pairs;
        let v = self.pair_statistics.variance(mu);
        let p = self.conversion_prob;
        let [e1, e2, e3] = self.efficiencies;
        let [b1, b2, b3] = self.background;
        let eta_bar = p * e2 + (1.0 - p) * e3;
        let cov = e1 * eta_bar * v;
        let var1 = e1 * e1 * v + e1 * (1.0 - e1) * mu + b1;
        let var23 = eta_bar * eta_bar * v
            + mu * (p * e2 * (1.0 - e2) + (1.0 - p) * e3 * (1.0 - e3) + (e2 - e3).powi(2) * p * (1.0 - p))
            + b2
            + b3;
        cov / (var1 * var23).sqrt()
    }
}

fn poisson_draw<R: Rng>(rng: &mut R, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("validated mean").sample(rng) as u64
}

fn binomial_draw<R: Rng>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("validated probability").sample(rng)
}

fn gamma_draw<R: Rng>(rng: &mut R, shape: f64, scale: f64) -> f64 {
    if scale <= 0.0 {
        return 0.0;
    }
    Gamma::new(shape, scale).expect("validated shape").sample(rng)
}

/// Simulates `shots` shots. Shots are split into chunks of [`CHUNK_SHOTS`],
/// each with its own ChaCha stream derived from `seed`, so the output does
/// not depend on the thread count.
pub fn simulate(model: &TripletModel, shots: usize, seed: u64) -> Result<Vec<TripletRecord>> {
    model.validate()?;
    if shots == 0 {
        return Err(Error::InvalidSpec("shots must be ≥ 1".into()));
    }
    let chunks = shots.div_ceil(CHUNK_SHOTS);
    let out: Vec<Vec<TripletRecord>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let start = c * CHUNK_SHOTS;
            let end = (start + CHUNK_SHOTS).min(shots);
            (start..end).map(|i| model.shot(&mut rng, i as u64)).collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

/// Normalized covariance between `m₁(i)` and `m₂(i+k) + m₃(i+k)`.
pub fn gamma(records: &[TripletRecord], k: usize) -> Result<f64> {
    if records.len() < k + 2 {
        return Err(Error::Domain(format!("lag {k} needs at least {} records, got {}", k + 2, records.len())));
    }
    let n = records.len() - k;
    let x = |i: usize| records[i].m1 as f64;
    let y = |i: usize| (records[i + k].m2 + records[i + k].m3) as f64;
    let mx = (0..n).map(x).sum::<f64>() / n as f64;
    let my = (0..n).map(y).sum::<f64>() / n as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (dx, dy) = (x(i) - mx, y(i) - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("m1"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("m2+m3"));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// `Γ(0)`.
pub fn epsilon(records: &[TripletRecord]) -> Result<f64> {
    gamma(records, 0)
}

pub fn write_records_csv<W: Write>(w: W, records: &[TripletRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    for r in records {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(r: R) -> Result<Vec<TripletRecord>> {
    csv::Reader::from_reader(r).deserialize().map(|r| r.map_err(csv_error)).collect()
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::InvalidSpec(format!("records CSV: {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LAB_ETA: [f64; 3] = [0.44, 0.72, 0.43];

    fn model(mu: f64, stats: PairStatistics, p: f64, eta: [f64; 3], b: [f64; 3]) -> TripletModel {
        TripletModel { mean_pairs: mu, pair_statistics: stats, conversion_prob: p, efficiencies: eta, background: b }
    }

    #[test]
    fn ideal_detection_conserves_photon_number() {
        let m = model(500.0, PairStatistics::Thermal, 0.3, [1.0; 3], [0.0; 3]);
        let r = simulate(&m, 3000, 1).unwrap();
        assert_eq!(r.len(), 3000);
        assert!(r.iter().all(|t| t.m1 == t.m2 + t.m3));
        assert!(r.iter().enumerate().all(|(i, t)| t.shot == i as u64));
        assert!((epsilon(&r).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conversion_off_leaves_field_two_dark() {
        let m = model(50.0, PairStatistics::Poisson, 0.0, [1.0; 3], [0.0; 3]);
        let r = simulate(&m, 500, 2).unwrap();
        assert!(r.iter().all(|t| t.m2 == 0 && t.m1 == t.m3));
    }

    #[test]
    fn poisson_means_within_three_sigma() {
        let mu = 1e6;
        let p = 0.02;
        let shots = 10_000;
        let m = model(mu, PairStatistics::Poisson, p, LAB_ETA, [0.0; 3]);
        let r = simulate(&m, shots, 3).unwrap();
        // thinned Poisson stays Poisson: variance equals mean
        let expected = [LAB_ETA[0] * mu, LAB_ETA[1] * p * mu, LAB_ETA[2] * (1.0 - p) * mu];
        let cols: [Vec<f64>; 3] = [
            r.iter().map(|t| t.m1 as f64).collect(),
            r.iter().map(|t| t.m2 as f64).collect(),
            r.iter().map(|t| t.m3 as f64).collect(),
        ];
        for j in 0..3 {
            let mean = cols[j].iter().sum::<f64>() / shots as f64;
            let sigma = (expected[j] / shots as f64).sqrt();
            assert!((mean - expected[j]).abs() < 3.0 * sigma, "arm {}: {mean} vs {}", j + 1, expected[j]);
        }
    }

    #[test]
    fn deterministic_and_thread_count_independent() {
        let m = model(1e4, PairStatistics::Multithermal { modes: 5.0 }, 0.1, LAB_ETA, [1.0; 3]);
        let a = simulate(&m, 5000, 42).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate(&m, 5000, 42).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, simulate(&m, 5000, 43).unwrap());
    }

    #[test]
    fn bright_thermal_lossy_epsilon_near_unity() {
        let m = model(1e4, PairStatistics::Thermal, 0.013, LAB_ETA, [0.0; 3]);
        let r = simulate(&m, 10_000, 4).unwrap();
        let eps = epsilon(&r).unwrap();
        assert!(eps > 0.99, "ε = {eps}");
        assert!((eps - m.expected_epsilon()).abs() < 0.01);
    }

    #[test]
    fn poisson_epsilon_matches_closed_form() {
        let m = model(1e4, PairStatistics::Poisson, 0.2, LAB_ETA, [0.0; 3]);
        let eta_bar = 0.2 * 0.72 + 0.8 * 0.43;
        assert!((m.expected_epsilon() - (0.44f64 * eta_bar).sqrt()).abs() < 1e-12);
        let eps = epsilon(&simulate(&m, 20_000, 5).unwrap()).unwrap();
        assert!((eps - m.expected_epsilon()).abs() < 4.0 / 20_000f64.sqrt());
    }

    #[test]
    fn lagged_correlation_vanishes() {
        let shots = 10_000;
        let m = model(1e4, PairStatistics::Thermal, 0.013, LAB_ETA, [0.0; 3]);
        let r = simulate(&m, shots, 6).unwrap();
        for k in 1..=5 {
            let g = gamma(&r, k).unwrap();
            assert!(g.abs() < 4.0 / (shots as f64).sqrt(), "Γ({k}) = {g}");
        }
    }

    #[test]
    fn shuffled_pairs_are_uncorrelated() {
        use rand::seq::SliceRandom;
        let shots = 10_000;
        let m = model(1e3, PairStatistics::Thermal, 0.1, LAB_ETA, [0.0; 3]);
        let mut r = simulate(&m, shots, 7).unwrap();
        let mut m1: Vec<u64> = r.iter().map(|t| t.m1).collect();
        m1.shuffle(&mut ChaCha8Rng::seed_from_u64(99));
        for (t, v) in r.iter_mut().zip(m1) {
            t.m1 = v;
        }
        assert!(epsilon(&r).unwrap().abs() < 4.0 / (shots as f64).sqrt());
    }

    #[test]
    fn background_does_not_raise_epsilon() {
        let shots = 20_000;
        let noise = 4.0 / (shots as f64).sqrt();
        let eps: Vec<f64> = [0.0, 10.0, 100.0, 1000.0]
            .iter()
            .map(|&b| {
                let m = model(200.0, PairStatistics::Thermal, 0.1, LAB_ETA, [b; 3]);
                epsilon(&simulate(&m, shots, 8).unwrap()).unwrap()
            })
            .collect();
        assert!(eps.windows(2).all(|w| w[1] <= w[0] + noise), "{eps:?}");
        assert!(eps[3] < eps[0]);
    }

    #[test]
    fn errors() {
        let flat = vec![TripletRecord { shot: 0, m1: 3, m2: 1, m3: 2 }; 10];
        assert!(matches!(gamma(&flat, 0), Err(Error::ZeroVariance("m1"))));
        assert!(gamma(&flat, 9).is_err());
        let bad = model(-1.0, PairStatistics::Poisson, 0.0, [1.0; 3], [0.0; 3]);
        assert!(simulate(&bad, 10, 0).is_err());
        let bad = model(1.0, PairStatistics::Poisson, 1.5, [1.0; 3], [0.0; 3]);
        assert!(simulate(&bad, 10, 0).is_err());
        let ok = model(1.0, PairStatistics::Poisson, 0.5, [1.0; 3], [0.0; 3]);
        assert!(simulate(&ok, 0, 0).is_err());
    }

    #[test]
    fn csv_round_trip_and_model_json() {
        let m = model(100.0, PairStatistics::Multithermal { modes: 3.0 }, 0.1, LAB_ETA, [0.5; 3]);
        let r = simulate(&m, 50, 9).unwrap();
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &r).unwrap();
        assert!(buf.starts_with(b"shot,m1,m2,m3\n"));
        assert_eq!(read_records_csv(buf.as_slice()).unwrap(), r);
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains(r#""kind":"multithermal""#));
        assert_eq!(serde_json::from_str::<TripletModel>(&json).unwrap(), m);
        assert!(read_records_csv("shot,m1,m2,m3\n0,1,-2,3\n".as_bytes()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn affine_rescaling_of_m1_leaves_gamma_unchanged(a in 1u64..50, c in 0u64..1000, seed in 0u64..1000, k in 0usize..3) {
            let m = model(300.0, PairStatistics::Thermal, 0.2, LAB_ETA, [1.0; 3]);
            let r = simulate(&m, 400, seed).unwrap();
            let scaled: Vec<_> = r.iter().map(|t| TripletRecord { m1: a * t.m1 + c, ..*t }).collect();
            let (g0, g1) = (gamma(&r, k).unwrap(), gamma(&scaled, k).unwrap());
            prop_assert!((g0 - g1).abs() < 1e-12);
            prop_assert!(g0.abs() <= 1.0 + 1e-12);
        }
    }
}
