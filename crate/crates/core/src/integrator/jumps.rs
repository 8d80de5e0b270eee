use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::model::JumpSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpEvent {
    pub time: f64,
    pub mark: usize,
}

/// Compound-Poisson event times on `(0, t_end]` with total rate
/// `Lambda = sum_k lambda_k`; each event carries mark `k` with probability
/// `lambda_k / Lambda`. Returns an empty list when there are no marks.
pub fn sample_jumps<R: Rng + ?Sized>(jumps: &JumpSpec, t_end: f64, rng: &mut R) -> Vec<JumpEvent> {
    let rate = jumps.total_rate();
    if jumps.is_empty() || !(rate > 0.0) || !(t_end > 0.0) {
        return Vec::new();
    }
    let waiting = Exp::new(rate).expect("positive total rate");
    let marks = WeightedIndex::new(jumps.marks.iter().map(|m| m.weight)).expect("positive weights");

    let mut events = Vec::with_capacity((rate * t_end * 1.1) as usize + 4);
    let mut t = 0.0;
    loop {
        t += waiting.sample(rng);
        if t > t_end {
            break;
        }
        let mark = marks.sample(rng);
        events.push(JumpEvent { time: t, mark });
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::JumpMark;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn no_marks_no_events() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert!(sample_jumps(&JumpSpec::none(), 1000.0, &mut rng).is_empty());
        }
    }

    #[test]
    fn events_are_ordered_and_in_range() {
        let spec = JumpSpec::new(vec![JumpMark::uniform(2.0, 0.1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ev = sample_jumps(&spec, 50.0, &mut rng);
        assert!(!ev.is_empty());
        assert!(ev.windows(2).all(|w| w[0].time <= w[1].time));
        assert!(ev.iter().all(|e| e.time > 0.0 && e.time <= 50.0 && e.mark == 0));
    }

    #[test]
    fn event_count_matches_poisson_mean() {
        // Lambda = 2 on (0, 1000]: mean 2000, variance 2000 per path.
        let spec = JumpSpec::new(vec![JumpMark::uniform(1.5, 0.1), JumpMark::uniform(0.5, -0.1)]);
        let n = 500;
        let total: usize = (0..n)
            .map(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                sample_jumps(&spec, 1000.0, &mut rng).len()
            })
            .sum();
        let mean = total as f64 / n as f64;
        let se = (2000.0f64 / n as f64).sqrt();
        assert!((mean - 2000.0).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn mark_proportions_follow_weights() {
        let spec = JumpSpec::new(vec![JumpMark::uniform(1.0, 0.1), JumpMark::uniform(3.0, 0.2)]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ev = sample_jumps(&spec, 5000.0, &mut rng);
        let n = ev.len() as f64;
        assert!(n >= 1e4);
        let frac = ev.iter().filter(|e| e.mark == 0).count() as f64 / n;
        let se = (0.25 * 0.75 / n).sqrt();
        assert!((frac - 0.25).abs() < 3.0 * se, "fraction {frac}, se {se}");
    }
}
