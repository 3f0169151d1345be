//! Memoized field-level evaluation of `(P, Q) = w(ρ, q)`.

use std::collections::HashMap;

use parking_lot::RwLock;
use rayon::prelude::*;

use super::{w_eval, CharOdeConfig, InvariantPoint, PhasePoint};
use crate::error::{Error, Result};
use crate::real::Real;

/// Keys are `(z1, z2)` rounded to a lattice of spacing `quantum`; a cached value is
/// always the invariant at the lattice point itself, so results do not depend on
/// evaluation order.
pub struct InvariantMap<T> {
    config: CharOdeConfig<T>,
    quantum: Option<T>,
    capacity: usize,
    table: RwLock<HashMap<(i64, i64), InvariantPoint<T>>>,
}

impl<T: Real> InvariantMap<T> {
    /// Uncached evaluation.
    pub fn exact(config: CharOdeConfig<T>) -> Self {
        InvariantMap { config, quantum: None, capacity: 0, table: RwLock::new(HashMap::new()) }
    }

    pub fn memoized(config: CharOdeConfig<T>, quantum: T) -> Self {
        InvariantMap { config, quantum: Some(quantum), capacity: 1 << 22, table: RwLock::new(HashMap::new()) }
    }

    pub fn config(&self) -> &CharOdeConfig<T> {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.table.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn w(&self, p: PhasePoint<T>) -> Result<InvariantPoint<T>> {
        let Some(qm) = self.quantum else {
            return w_eval(p, &self.config);
        };
        let k1 = (p.z1 / qm).round();
        let k2 = (p.z2 / qm).round();
        let center = PhasePoint { z1: k1 * qm, z2: k2 * qm };
        if !(center.z1 > T::zero()) {
            return w_eval(p, &self.config);
        }
        let key = (
            k1.to_i64().ok_or_else(|| Error::NonFinite("cache key".into()))?,
            k2.to_i64().ok_or_else(|| Error::NonFinite("cache key".into()))?,
        );
        if let Some(v) = self.table.read().get(&key) {
            return Ok(*v);
        }
        let v = w_eval(center, &self.config)?;
        let mut t = self.table.write();
        if t.len() >= self.capacity {
            t.clear();
        }
        t.insert(key, v);
        Ok(v)
    }

    /// `(P, Q)` per cell for raw `ρ` and axis-1 `q` values.
    pub fn fields(&self, rho: &[T], q: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        if rho.len() != q.len() {
            return Err(Error::GridMismatch("rho and q lengths differ".into()));
        }
        let pts: Vec<InvariantPoint<T>> = rho
            .par_iter()
            .zip(q.par_iter())
            .map(|(&r, &v)| self.w(PhasePoint::new(r, v)?))
            .collect::<Result<_>>()?;
        Ok(pts.into_iter().map(|p| (p.w1, p.w2)).unzip())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn memo_matches_lattice_value() {
        let cfg = CharOdeConfig::<f64>::default();
        let m = InvariantMap::memoized(cfg, 1e-6);
        let a = m.w(PhasePoint::new(1.0000002, 0.3).unwrap()).unwrap();
        let b = w_eval(PhasePoint::new(1.0, 0.3).unwrap(), &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(m.len(), 1);
        let c = m.w(PhasePoint::new(0.9999998, 0.3).unwrap()).unwrap();
        assert_eq!(a, c);
        assert_eq!(m.len(), 1);
    }
}
