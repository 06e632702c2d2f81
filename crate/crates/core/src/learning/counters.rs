//! Sufficient statistics kept by the learner.

/// Visit, reward, holding-time and transition counts. `n` holds the counts
/// prior to the current episode and `nu` the counts inside it; the sums and
/// transition counts cover both.
#[derive(Debug, Clone, PartialEq)]
pub struct Counters {
    offsets: Vec<usize>,
    pub n: Vec<u64>,
    pub nu: Vec<u64>,
    pub reward: Vec<f64>,
    pub holding: Vec<f64>,
    /// Sorted sparse successor counts per pair.
    pub transitions: Vec<Vec<(usize, u64)>>,
    /// Index of the next decision step, starting at 1.
    pub i: u64,
    /// Number of episodes started.
    pub k: u64,
}

impl Counters {
    pub fn new(actions_per_state: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(actions_per_state.len() + 1);
        let mut total = 0;
        for &na in actions_per_state {
            offsets.push(total);
            total += na;
        }
        offsets.push(total);
        Counters {
            offsets,
            n: vec![0; total],
            nu: vec![0; total],
            reward: vec![0.0; total],
            holding: vec![0.0; total],
            transitions: vec![Vec::new(); total],
            i: 1,
            k: 0,
        }
    }

    pub fn num_states(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_actions(&self, s: usize) -> usize {
        self.offsets[s + 1] - self.offsets[s]
    }

    pub fn max_actions(&self) -> usize {
        (0..self.num_states()).map(|s| self.num_actions(s)).max().unwrap_or(0)
    }

    pub fn pair(&self, s: usize, a: usize) -> usize {
        self.offsets[s] + a
    }

    pub fn record(&mut self, s: usize, a: usize, next: usize, reward: f64, holding: f64) {
        let idx = self.pair(s, a);
        self.nu[idx] += 1;
        self.reward[idx] += reward;
        self.holding[idx] += holding;
        let row = &mut self.transitions[idx];
        match row.binary_search_by_key(&next, |e| e.0) {
            Ok(pos) => row[pos].1 += 1,
            Err(pos) => row.insert(pos, (next, 1)),
        }
        self.i += 1;
    }

    /// Folds the in-episode counts into the prior counts.
    pub fn close_episode(&mut self) {
        for (n, nu) in self.n.iter_mut().zip(self.nu.iter_mut()) {
            *n += *nu;
            *nu = 0;
        }
    }

    /// Total number of recorded decision steps.
    pub fn total(&self) -> u64 {
        self.n.iter().sum::<u64>() + self.nu.iter().sum::<u64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bookkeeping() {
        let mut c = Counters::new(&[2, 1]);
        c.record(0, 1, 1, 0.5, 2.0);
        c.record(0, 1, 0, 0.5, 1.0);
        c.record(0, 1, 1, 0.0, 1.0);
        let idx = c.pair(0, 1);
        assert_eq!(c.transitions[idx], vec![(0, 1), (1, 2)]);
        assert_eq!(c.nu[idx], 3);
        assert_eq!(c.i, 1 + c.total());
        c.close_episode();
        assert_eq!((c.n[idx], c.nu[idx]), (3, 0));
        let sum: u64 = c.transitions[idx].iter().map(|e| e.1).sum();
        assert_eq!(sum, c.n[idx] + c.nu[idx]);
        assert_eq!(c.pair(1, 0), 2);
    }
}
