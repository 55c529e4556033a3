use crate::{Error, Result};

/// A point `(q, p)` of the truncated phase space at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalState {
    q: Vec<f64>,
    p: Vec<f64>,
    t: f64,
}

impl CanonicalState {
    pub fn new(q: Vec<f64>, p: Vec<f64>, t: f64) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::Dimension("phase space must have dimension >= 1".into()));
        }
        if q.len() != p.len() {
            return Err(Error::Dimension(format!("{} coordinates but {} momenta", q.len(), p.len())));
        }
        if !t.is_finite() || q.iter().chain(&p).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("state entries must be finite".into()));
        }
        Ok(Self { q, p, t })
    }

    /// Origin of an `n`-dimensional phase space at `t = 0`.
    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n], vec![0.0; n], 0.0)
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>, f64) {
        (self.q, self.p, self.t)
    }

    // Unchecked constructors for internal stencils: callers keep lengths equal.
    pub(crate) fn from_parts(q: Vec<f64>, p: Vec<f64>, t: f64) -> Self {
        debug_assert_eq!(q.len(), p.len());
        Self { q, p, t }
    }

    pub(crate) fn with_q(&self, k: usize, value: f64) -> Self {
        let mut s = self.clone();
        s.q[k] = value;
        s
    }

    pub(crate) fn with_p(&self, k: usize, value: f64) -> Self {
        let mut s = self.clone();
        s.p[k] = value;
        s
    }

    pub fn with_momenta(&self, p: &[f64]) -> Result<Self> {
        Self::new(self.q.clone(), p.to_vec(), self.t)
    }

    /// Max-norm distance in phase space, ignoring time.
    pub fn distance(&self, other: &Self) -> f64 {
        self.q.iter().zip(&other.q).chain(self.p.iter().zip(&other.p)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// States sampled along a flow at strictly increasing times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<CanonicalState>,
}

impl Trajectory {
    pub fn new(initial: CanonicalState) -> Self {
        Self { times: vec![initial.t()], states: vec![initial] }
    }

    pub fn push(&mut self, state: CanonicalState) -> Result<()> {
        let last = *self.times.last().expect("trajectory is never empty");
        if state.t() <= last {
            return Err(Error::InvalidArgument(format!(
                "trajectory times must increase ({} after {})",
                state.t(),
                last
            )));
        }
        if state.dim() != self.states[0].dim() {
            return Err(Error::Dimension("trajectory states must share a dimension".into()));
        }
        self.times.push(state.t());
        self.states.push(state);
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[CanonicalState] {
        &self.states
    }

    pub fn first(&self) -> &CanonicalState {
        &self.states[0]
    }

    pub fn last(&self) -> &CanonicalState {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatched_lengths() {
        assert!(matches!(CanonicalState::new(vec![1.0], vec![1.0, 2.0], 0.0), Err(Error::Dimension(_))));
        assert!(CanonicalState::new(vec![], vec![], 0.0).is_err());
        assert!(CanonicalState::new(vec![f64::NAN], vec![0.0], 0.0).is_err());
    }

    #[test]
    fn trajectory_times_must_increase() {
        let s = CanonicalState::zeros(2).unwrap();
        let mut traj = Trajectory::new(s.clone());
        assert!(traj.push(s.clone()).is_err());
        let later = CanonicalState::new(vec![0.0; 2], vec![0.0; 2], 1.0).unwrap();
        traj.push(later).unwrap();
        assert_eq!(traj.len(), 2);
        let wrong_dim = CanonicalState::new(vec![0.0], vec![0.0], 2.0).unwrap();
        assert!(traj.push(wrong_dim).is_err());
    }
}
