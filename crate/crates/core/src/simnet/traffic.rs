//! Poisson interest arrivals.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::{NodeId, SimError};
use crate::name::Name;

/// Arrivals at rate `lambda` per second, a fraction `delta` of them for
/// protected content. Targets are drawn uniformly within each class.
#[derive(Debug, Clone)]
pub struct TrafficProfile {
    pub lambda: f64,
    pub delta: f64,
    pub start_ms: u64,
    pub duration_ms: u64,
    /// Issuing consumers, drawn uniformly per arrival.
    pub consumers: Vec<NodeId>,
    pub protected: Vec<Name>,
    pub public: Vec<Name>,
    /// Stop after this many arrivals even if the duration is not over.
    pub max_interests: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrival {
    pub time_us: u64,
    pub consumer: NodeId,
    pub name: Name,
}

impl TrafficProfile {
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            problems.push(format!(
                "traffic lambda must be positive, got {}",
                self.lambda
            ));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            problems.push(format!(
                "traffic delta must lie in [0, 1], got {}",
                self.delta
            ));
        }
        if self.consumers.is_empty() {
            problems.push("traffic needs at least one consumer".to_string());
        }
        if self.delta > 0.0 && self.protected.is_empty() {
            problems.push("traffic delta > 0 needs protected targets".to_string());
        }
        if self.delta < 1.0 && self.public.is_empty() {
            problems.push("traffic delta < 1 needs public targets".to_string());
        }
        problems
    }

    /// Draws the arrival sequence: exponential gaps with mean `1/lambda`.
    pub fn arrivals<R: Rng>(&self, rng: &mut R) -> Result<Vec<Arrival>, SimError> {
        let problems = self.validate();
        if !problems.is_empty() {
            return Err(SimError::Config(problems));
        }
        let gap = Exp::new(self.lambda).expect("lambda checked positive");
        let start = self.start_ms as f64 / 1e3;
        let end = start + self.duration_ms as f64 / 1e3;
        let limit = self.max_interests.unwrap_or(usize::MAX);
        let mut t = start;
        let mut out = Vec::new();
        while out.len() < limit {
            t += gap.sample(rng);
            if t >= end {
                break;
            }
            let consumer = *self.consumers.choose(rng).expect("validated non-empty");
            let pool = if rng.gen_bool(self.delta) {
                &self.protected
            } else {
                &self.public
            };
            let name = pool.choose(rng).expect("validated non-empty").clone();
            out.push(Arrival {
                time_us: (t * 1e6).round() as u64,
                consumer,
                name,
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    use super::*;

    fn profile(lambda: f64, delta: f64) -> TrafficProfile {
        TrafficProfile {
            lambda,
            delta,
            start_ms: 0,
            duration_ms: 100_000,
            consumers: vec![1],
            protected: vec![Name::parse("/a/p", 1).unwrap()],
            public: vec![Name::parse("/a/q", 1).unwrap()],
            max_interests: None,
        }
    }

    #[test]
    fn poisson_count_within_three_sigma() {
        // Count over 100 s at 40/s is Poisson(4000): sigma = sqrt(4000) ≈ 63.2.
        for seed in 0..5 {
            let n = profile(40.0, 0.5)
                .arrivals(&mut ChaCha20Rng::seed_from_u64(seed))
                .unwrap()
                .len() as f64;
            assert!(
                (n - 4000.0).abs() <= 3.0 * 4000f64.sqrt(),
                "seed {seed}: {n}"
            );
        }
    }

    #[test]
    fn delta_splits_targets() {
        let a = profile(100.0, 0.2)
            .arrivals(&mut ChaCha20Rng::seed_from_u64(1))
            .unwrap();
        let protected =
            a.iter().filter(|x| x.name.to_string() == "/a/p").count() as f64 / a.len() as f64;
        assert!((protected - 0.2).abs() < 0.02, "{protected}");
        assert!(a.windows(2).all(|w| w[0].time_us <= w[1].time_us));
    }

    #[test]
    fn invalid_profiles_rejected() {
        assert_eq!(profile(0.0, 0.5).validate().len(), 1);
        assert_eq!(profile(1.0, 1.5).validate().len(), 1);
        let mut p = profile(1.0, 1.0);
        p.public.clear();
        assert!(p.validate().is_empty());
        p.protected.clear();
        assert_eq!(p.validate().len(), 1);
    }
}
