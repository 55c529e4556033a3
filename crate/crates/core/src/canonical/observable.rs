use std::fmt;
use std::sync::Arc;

use super::CanonicalState;
use crate::{Error, Result};

type EvalFn = dyn Fn(&CanonicalState) -> f64 + Send + Sync;
type GradFn = dyn Fn(&CanonicalState) -> (Vec<f64>, Vec<f64>) + Send + Sync;

/// A named functional `f(q, p, t)` on phase space, optionally with an
/// analytic gradient `(∂f/∂q, ∂f/∂p)`.
#[derive(Clone)]
pub struct Observable {
    name: String,
    eval: Arc<EvalFn>,
    gradient: Option<Arc<GradFn>>,
}

impl Observable {
    pub fn new<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&CanonicalState) -> f64 + Send + Sync + 'static,
    {
        Self { name: name.into(), eval: Arc::new(eval), gradient: None }
    }

    pub fn with_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(&CanonicalState) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    /// The coordinate `q_k` (zero-based index).
    pub fn coordinate(k: usize) -> Self {
        Self::new(format!("q{}", k + 1), move |s| s.q()[k]).with_gradient(move |s| {
            let mut gq = vec![0.0; s.dim()];
            gq[k] = 1.0;
            (gq, vec![0.0; s.dim()])
        })
    }

    /// The momentum `p_k` (zero-based index).
    pub fn momentum(k: usize) -> Self {
        Self::new(format!("p{}", k + 1), move |s| s.p()[k]).with_gradient(move |s| {
            let mut gp = vec![0.0; s.dim()];
            gp[k] = 1.0;
            (vec![0.0; s.dim()], gp)
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Raw evaluation; may return non-finite values.
    pub fn value(&self, s: &CanonicalState) -> f64 {
        (self.eval)(s)
    }

    /// Evaluation that reports non-finite results as an error naming the observable.
    pub fn evaluate(&self, s: &CanonicalState) -> Result<f64> {
        let v = self.value(s);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { observable: self.name.clone() })
        }
    }

    pub fn analytic_gradient(&self, s: &CanonicalState) -> Option<(Vec<f64>, Vec<f64>)> {
        self.gradient.as_ref().map(|g| g(s))
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("name", &self.name)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

/// An ordered family of candidate first integrals `f_i`, with optional
/// recorded values `α_i`.
#[derive(Debug, Clone)]
pub struct ObservableSet {
    observables: Vec<Observable>,
    alpha: Option<Vec<f64>>,
}

impl ObservableSet {
    pub fn new(observables: Vec<Observable>) -> Result<Self> {
        for (i, a) in observables.iter().enumerate() {
            if observables[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::InvalidArgument(format!("duplicate observable name `{}`", a.name)));
            }
        }
        Ok(Self { observables, alpha: None })
    }

    pub fn with_alpha(mut self, alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() != self.observables.len() {
            return Err(Error::Dimension(format!(
                "{} recorded values for {} observables",
                alpha.len(),
                self.observables.len()
            )));
        }
        self.alpha = Some(alpha);
        Ok(self)
    }

    /// Records `α_i = f_i(s)`.
    pub fn record(self, s: &CanonicalState) -> Result<Self> {
        let alpha = self.evaluate(s)?;
        self.with_alpha(alpha)
    }

    pub fn alpha(&self) -> Option<&[f64]> {
        self.alpha.as_deref()
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.observables.iter().map(|o| o.name()).collect()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Observable> {
        self.observables.iter()
    }

    pub fn get(&self, i: usize) -> Option<&Observable> {
        self.observables.get(i)
    }

    pub fn evaluate(&self, s: &CanonicalState) -> Result<Vec<f64>> {
        self.observables.iter().map(|o| o.evaluate(s)).collect()
    }

    /// Drops the observables whose names are listed. Unknown names are an error.
    pub fn without(&self, names: &[&str]) -> Result<Self> {
        for n in names {
            if !self.observables.iter().any(|o| o.name() == *n) {
                return Err(Error::InvalidArgument(format!("no observable named `{n}`")));
            }
        }
        let keep: Vec<usize> = (0..self.len()).filter(|&i| !names.contains(&self.observables[i].name())).collect();
        Ok(Self {
            observables: keep.iter().map(|&i| self.observables[i].clone()).collect(),
            alpha: self.alpha.as_ref().map(|a| keep.iter().map(|&i| a[i]).collect()),
        })
    }
}

impl<'a> IntoIterator for &'a ObservableSet {
    type Item = &'a Observable;
    type IntoIter = std::slice::Iter<'a, Observable>;

    fn into_iter(self) -> Self::IntoIter {
        self.observables.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_must_be_distinct() {
        let set = ObservableSet::new(vec![Observable::coordinate(0), Observable::coordinate(0)]);
        assert!(set.is_err());
    }

    #[test]
    fn without_keeps_order_and_alpha() {
        let s = CanonicalState::new(vec![1.0, 2.0], vec![3.0, 4.0], 0.0).unwrap();
        let set =
            ObservableSet::new(vec![Observable::coordinate(0), Observable::coordinate(1), Observable::momentum(0)])
                .unwrap()
                .record(&s)
                .unwrap();
        let reduced = set.without(&["q2"]).unwrap();
        assert_eq!(reduced.names(), vec!["q1", "p1"]);
        assert_eq!(reduced.alpha().unwrap(), &[1.0, 3.0]);
        assert!(set.without(&["nope"]).is_err());
    }

    #[test]
    fn non_finite_value_names_the_observable() {
        let bad = Observable::new("blowup", |s: &CanonicalState| 1.0 / s.q()[0]);
        let s = CanonicalState::zeros(1).unwrap();
        match bad.evaluate(&s) {
            Err(Error::Evaluation { observable }) => assert_eq!(observable, "blowup"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
