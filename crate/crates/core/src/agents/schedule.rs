//! Episode schedules: when an agent draws a new parameter.

/// Resample at `t = 1, 2, 4, 8, ...` regardless of what has been observed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoublingSchedule {
    next: u64,
}

impl Default for DoublingSchedule {
    fn default() -> Self {
        Self { next: 1 }
    }
}

impl DoublingSchedule {
    /// The next resampling step `L`.
    pub fn next_switch(&self) -> u64 {
        self.next
    }

    /// Whether `t` is a resampling step; advances `L <- 2L` when it is.
    pub fn due(&mut self, t: u64) -> bool {
        if t == self.next {
            self.next = self.next.saturating_mul(2);
            true
        } else {
            false
        }
    }

    /// All switch steps up to and including `horizon`.
    pub fn switch_times(horizon: u64) -> Vec<u64> {
        std::iter::successors(Some(1u64), |&l| l.checked_mul(2))
            .take_while(|&l| l <= horizon)
            .collect()
    }
}

/// Dynamic episodes: a new episode starts once the current one is one step
/// longer than the previous, or once some state-action visit count has
/// doubled since the episode began. A pair unvisited at the episode start
/// counts as doubled on its first visit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TsdeSchedule {
    n_actions: usize,
    started: bool,
    episode_start: u64,
    prev_episode_len: u64,
    visit_counts: Vec<u64>,
    counts_at_episode_start: Vec<u64>,
}

impl TsdeSchedule {
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_actions,
            started: false,
            episode_start: 0,
            prev_episode_len: 0,
            visit_counts: vec![0; n_states * n_actions],
            counts_at_episode_start: vec![0; n_states * n_actions],
        }
    }

    pub fn episode_start(&self) -> u64 {
        self.episode_start
    }

    pub fn prev_episode_len(&self) -> u64 {
        self.prev_episode_len
    }

    pub fn visit_count(&self, s: usize, a: usize) -> u64 {
        self.visit_counts[s * self.n_actions + a]
    }

    pub fn visit_counts(&self) -> &[u64] {
        &self.visit_counts
    }

    fn length_exceeded(&self, t: u64) -> bool {
        t - self.episode_start > self.prev_episode_len
    }

    fn counts_doubled(&self) -> bool {
        self.visit_counts
            .iter()
            .zip(&self.counts_at_episode_start)
            .any(|(&now, &start)| if start == 0 { now > 0 } else { now >= 2 * start })
    }

    pub fn should_switch(&self, t: u64) -> bool {
        !self.started || self.length_exceeded(t) || self.counts_doubled()
    }

    pub fn begin_episode(&mut self, t: u64) {
        if self.started {
            self.prev_episode_len = t - self.episode_start;
        }
        self.started = true;
        self.episode_start = t;
        self.counts_at_episode_start.copy_from_slice(&self.visit_counts);
    }

    pub fn record_visit(&mut self, s: usize, a: usize) {
        self.visit_counts[s * self.n_actions + a] += 1;
    }
}

/// Dynamic episodes for linear systems: the length rule as in
/// [`TsdeSchedule`], plus a new episode once the determinant of the
/// posterior covariance falls below half its value at the episode start.
#[derive(Debug, Clone, PartialEq)]
pub struct TsdeLqSchedule {
    started: bool,
    episode_start: u64,
    prev_episode_len: u64,
    /// `ln det` of the posterior precision when the episode began.
    log_det_precision_at_start: f64,
}

impl Default for TsdeLqSchedule {
    fn default() -> Self {
        Self {
            started: false,
            episode_start: 0,
            prev_episode_len: 0,
            log_det_precision_at_start: f64::NEG_INFINITY,
        }
    }
}

impl TsdeLqSchedule {
    /// `det(cov) < det(cov_start) / 2` is `ln det(prec) > ln det(prec_start) + ln 2`.
    pub fn should_switch(&self, t: u64, log_det_precision: f64) -> bool {
        !self.started
            || t - self.episode_start > self.prev_episode_len
            || log_det_precision > self.log_det_precision_at_start + std::f64::consts::LN_2
    }

    pub fn begin_episode(&mut self, t: u64, log_det_precision: f64) {
        if self.started {
            self.prev_episode_len = t - self.episode_start;
        }
        self.started = true;
        self.episode_start = t;
        self.log_det_precision_at_start = log_det_precision;
    }

    pub fn episode_start(&self) -> u64 {
        self.episode_start
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_switch_times() {
        let mut sched = DoublingSchedule::default();
        let hits: Vec<u64> = (1..=1000).filter(|&t| sched.due(t)).collect();
        assert_eq!(hits, vec![1, 2, 4, 8, 16, 32, 64, 128, 256, 512]);
        assert_eq!(DoublingSchedule::switch_times(1000), hits);
        for horizon in 1..5000u64 {
            let n = DoublingSchedule::switch_times(horizon).len() as u32;
            assert_eq!(n, horizon.ilog2() + 1);
        }
    }

    #[test]
    fn doubling_is_quiet_between_powers() {
        let mut sched = DoublingSchedule::default();
        assert!(sched.due(1));
        assert!(sched.due(2));
        assert_eq!(sched.next_switch(), 4);
        assert!(!sched.due(3));
        assert_eq!(sched.next_switch(), 4);
    }

    #[test]
    fn length_rule_grows_by_one() {
        // counts never recorded: only the length criterion acts
        let mut sched = TsdeSchedule::new(1, 1);
        let mut starts = Vec::new();
        for t in 1..=30u64 {
            if sched.should_switch(t) {
                sched.begin_episode(t);
                starts.push(t);
            }
        }
        let lengths: Vec<u64> = starts.windows(2).map(|w| w[1] - w[0]).collect();
        assert_eq!(lengths, vec![1, 2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn visit_doubling_triggers() {
        let mut sched = TsdeSchedule::new(2, 2);
        for _ in 0..4 {
            sched.record_visit(1, 1);
        }
        sched.begin_episode(1);
        sched.prev_episode_len = 100;
        for _ in 0..3 {
            sched.record_visit(1, 1);
        }
        assert!(!sched.should_switch(5));
        sched.record_visit(1, 1);
        assert!(sched.should_switch(6));
    }

    #[test]
    fn first_visit_triggers() {
        let mut sched = TsdeSchedule::new(2, 2);
        sched.begin_episode(1);
        sched.prev_episode_len = 100;
        assert!(!sched.should_switch(2));
        sched.record_visit(0, 1);
        assert!(sched.should_switch(3));
    }

    #[test]
    fn lq_determinant_rule() {
        let mut sched = TsdeLqSchedule::default();
        assert!(sched.should_switch(1, 0.0));
        sched.begin_episode(1, 0.0);
        // short episode, covariance unchanged
        assert!(!sched.should_switch(1, 0.0));
        // covariance determinant halves exactly: not yet strictly below half
        assert!(!sched.should_switch(1, std::f64::consts::LN_2));
        assert!(sched.should_switch(1, std::f64::consts::LN_2 + 1e-9));
        // length rule
        assert!(sched.should_switch(2, 0.0));
    }
}
