//! Compact-image constants: `δ₀ = min ∂λ₂/∂w₁` and the bounds `m_Φ ≤ Φ ≤ M_Φ`,
//! with `Ψ' = (∂λ₂/∂w₂) / (λ₂ - λ₁)` integrated along `w₁ = P₀(x₀)`.

use rayon::prelude::*;
use serde::Serialize;

use super::{dl2dw1_from, dl2dw2_from, invert_w, w_detail, CharOdeConfig, InvariantPoint, PhasePoint};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::real::Real;

const DELTA_MARGIN: f64 = 0.01;
const SIMPSON_TOL: f64 = 1e-8;
const SIMPSON_DEPTH: usize = 20;
const PSI_NODES: usize = 97;
const PSI_MARGIN: f64 = 0.05;

/// Adaptive Simpson quadrature with absolute tolerance `tol` (recursion depth capped).
pub fn adaptive_simpson<T: Real>(f: &impl Fn(T) -> Result<T>, a: T, b: T, tol: T) -> Result<T> {
    fn rec<T: Real>(
        f: &impl Fn(T) -> Result<T>,
        a: T,
        b: T,
        fa: T,
        fm: T,
        fb: T,
        whole: T,
        tol: T,
        depth: usize,
    ) -> Result<T> {
        let half = T::lit(0.5);
        let m = half * (a + b);
        let lm = half * (a + m);
        let rm = half * (m + b);
        let flm = f(lm)?;
        let frm = f(rm)?;
        let sixth = T::one() / T::lit(6.0);
        let left = (m - a) * sixth * (fa + T::lit(4.0) * flm + fm);
        let right = (b - m) * sixth * (fm + T::lit(4.0) * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= T::lit(15.0) * tol {
            return Ok(left + right + delta / T::lit(15.0));
        }
        Ok(rec(f, a, m, fa, flm, fm, left, half * tol, depth - 1)?
            + rec(f, m, b, fm, frm, fb, right, half * tol, depth - 1)?)
    }
    if a == b {
        return Ok(T::zero());
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = T::lit(0.5) * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, SIMPSON_DEPTH)
}

/// Tabulated `Ψ(w₂) - Ψ(Q_anchor)` along `w₁ = P_anchor`, cubic Hermite in between nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiTable<T> {
    pub p_anchor: T,
    pub q_anchor: T,
    pub nodes: Vec<T>,
    pub psi: Vec<T>,
    pub dpsi: Vec<T>,
}

impl<T: Real> PsiTable<T> {
    pub fn range(&self) -> (T, T) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    /// `Ψ(w₂) - Ψ(Q_anchor)`.
    pub fn eval(&self, w2: T) -> Result<T> {
        let n = self.nodes.len();
        if n == 1 {
            return if (w2 - self.nodes[0]).abs() <= T::lit(1e-9) * (T::one() + w2.abs()) {
                Ok(T::zero())
            } else {
                Err(Error::OutsideImage(format!("Psi table is a single point, asked for {w2}")))
            };
        }
        let (lo, hi) = self.range();
        let slack = T::lit(1e-9) * (hi - lo);
        if w2 < lo - slack || w2 > hi + slack {
            return Err(Error::OutsideImage(format!("w2 = {w2} outside tabulated [{lo}, {hi}]")));
        }
        let w2 = w2.max(lo).min(hi);
        let k = match self.nodes.iter().position(|&x| x > w2) {
            Some(0) => 0,
            Some(k) => k - 1,
            None => n - 2,
        };
        let (x0, x1) = (self.nodes[k], self.nodes[k + 1]);
        let dx = x1 - x0;
        let t = (w2 - x0) / dx;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        Ok(h00 * self.psi[k] + h10 * dx * self.dpsi[k] + h01 * self.psi[k + 1] + h11 * dx * self.dpsi[k + 1])
    }

    /// `Φ = exp(Ψ(w₂) - Ψ(Q_anchor))`.
    pub fn phi(&self, w2: T) -> Result<T> {
        self.eval(w2).map(|v| v.exp())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageBounds<T> {
    pub p_min: T,
    pub p_max: T,
    pub q_min: T,
    pub q_max: T,
    pub delta0: T,
    pub m_phi: T,
    #[serde(rename = "M_phi")]
    pub big_m_phi: T,
    /// Lattice points of the range rectangle that lie outside `w(Ω)` (not inverted).
    pub lattice_skipped: usize,
    pub lattice_total: usize,
    /// `ρ` range over the inverted lattice and data points.
    pub rho_min: T,
    pub rho_max: T,
    /// Largest `|q|` over the inverted lattice and data points.
    pub q_abs_max: T,
    #[serde(skip)]
    pub psi: PsiTable<T>,
}

/// `(1/(λ₂-λ₁)) ∂λ₂/∂w₂ = -z₂ / (f₂ S³)` at `w⁻¹(p, w2)`.
fn psi_integrand<T: Real>(p: T, w2: T, config: &CharOdeConfig<T>) -> Result<T> {
    let z = invert_w(InvariantPoint::new(p, w2)?, config)?;
    let d = w_detail(z, config)?;
    Ok(dl2dw2_from(z, d.f2) / z.gap())
}

fn dl2dw1_at<T: Real>(p: T, q: T, config: &CharOdeConfig<T>) -> Result<(T, PhasePoint<T>)> {
    let z: PhasePoint<T> = invert_w(InvariantPoint::new(p, q)?, config)?;
    let d = w_detail(z, config)?;
    Ok((dl2dw1_from(z, d.f1), z))
}

fn distinct_pairs<T: Real>(p: &[T], q: &[T]) -> Vec<(T, T)> {
    let mut v: Vec<(T, T)> = p.iter().copied().zip(q.iter().copied()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v.dedup_by(|a, b| (a.0 - b.0).abs() <= T::lit(1e-13) * a.0.abs() && (a.1 - b.1).abs() <= T::lit(1e-13) * a.1.abs());
    v
}

/// Range constants for the invariant fields `P₀`, `Q₀`.
///
/// `δ₀` is the minimum of `∂λ₂/∂w₁` over a `samples × samples` lattice of the range
/// rectangle together with every data point, less a 1% margin. Lattice points outside
/// `w(Ω)` are skipped and counted; data points must invert. `Ψ` is tabulated along
/// `w₁ = anchor.0` (default: the first cell) over the part of `[q_min, q_max]` that is
/// connected to `anchor.1` inside `w(Ω)`.
pub fn image_bounds<T: Real>(
    p0: &ScalarField<T>,
    q0: &ScalarField<T>,
    samples: usize,
    config: &CharOdeConfig<T>,
    anchor: Option<(T, T)>,
) -> Result<ImageBounds<T>> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples per axis".into()));
    }
    let (p_min, p_max, q_min, q_max) = (p0.min(), p0.max(), q0.min(), q0.max());
    let (pa, qa) = anchor.unwrap_or((p0.at(0), q0.at(0)));

    let data = distinct_pairs(p0.values(), q0.values());
    let data_vals: Vec<(T, PhasePoint<T>)> = data.par_iter().map(|&(p, q)| dl2dw1_at(p, q, config)).collect::<Result<_>>()?;

    let mut lattice = Vec::with_capacity(samples * samples);
    let sm1 = T::from_usize_lossy(samples - 1);
    for i in 0..samples {
        for j in 0..samples {
            let p = p_min + (p_max - p_min) * T::from_usize_lossy(i) / sm1;
            let q = q_min + (q_max - q_min) * T::from_usize_lossy(j) / sm1;
            lattice.push((p, q));
        }
    }
    let lattice_total = lattice.len();
    let lat_vals: Vec<Option<(T, PhasePoint<T>)>> = lattice.par_iter().map(|&(p, q)| dl2dw1_at(p, q, config).ok()).collect();
    let lattice_skipped = lat_vals.iter().filter(|v| v.is_none()).count();

    let all = || data_vals.iter().chain(lat_vals.iter().flatten());
    let min_val = all().fold(T::infinity(), |m, v| m.min(v.0));
    let rho_min = all().fold(T::infinity(), |m, v| m.min(v.1.z1));
    let rho_max = all().fold(T::zero(), |m, v| m.max(v.1.z1));
    let q_abs_max = all().fold(T::zero(), |m, v| m.max(v.1.z2.abs()));
    if !(min_val > T::zero()) {
        return Err(Error::InvalidParameter(format!("dλ2/dw1 minimum {min_val} is not positive")));
    }
    let delta0 = min_val * (T::one() - T::lit(DELTA_MARGIN));

    // a margin beyond the data range absorbs the discrete overshoot of Q along a trace
    let margin = T::lit(PSI_MARGIN) * (q_max - q_min);
    let hi = (q_max + margin).min(q_max * (T::one() - T::lit(PSI_MARGIN)));
    let psi = psi_table(pa, qa, (q_min - margin).min(qa), hi.max(qa), config)?;
    let lo = psi.psi.iter().fold(T::zero(), |m, &v| m.min(v));
    let hi = psi.psi.iter().fold(T::zero(), |m, &v| m.max(v));

    Ok(ImageBounds {
        p_min,
        p_max,
        q_min,
        q_max,
        delta0,
        m_phi: lo.exp(),
        big_m_phi: hi.exp(),
        lattice_skipped,
        lattice_total,
        rho_min,
        rho_max,
        q_abs_max,
        psi,
    })
}

/// Tabulates `Ψ` on nodes uniform in `log(-w₂)`; the table stops where `w₁ = pa`
/// leaves the image.
pub fn psi_table<T: Real>(pa: T, qa: T, q_lo: T, q_hi: T, config: &CharOdeConfig<T>) -> Result<PsiTable<T>> {
    if !(q_hi < T::zero()) {
        return Err(Error::OutsideImage(format!("Q range must be negative, got upper end {q_hi}")));
    }
    let g_anchor = psi_integrand(pa, qa, config)?;
    if q_hi - q_lo <= T::lit(1e-14) * q_lo.abs() {
        return Ok(PsiTable { p_anchor: pa, q_anchor: qa, nodes: vec![qa], psi: vec![T::zero()], dpsi: vec![g_anchor] });
    }
    // nodes in ascending w2 order: from q_lo (most negative) up to q_hi
    let (l_lo, l_hi) = ((-q_hi).ln(), (-q_lo).ln());
    let k = PSI_NODES - 1;
    let mut nodes: Vec<T> = (0..=k)
        .map(|i| -(l_hi - (l_hi - l_lo) * T::from_usize_lossy(i) / T::from_usize_lossy(k)).exp())
        .collect();
    nodes.push(qa);
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    nodes.dedup_by(|a, b| (*a - *b).abs() <= T::lit(1e-14) * a.abs());
    let ia = nodes
        .iter()
        .position(|&x| (x - qa).abs() <= T::lit(1e-14) * qa.abs())
        .ok_or_else(|| Error::InvalidParameter("anchor lost while tabulating Psi".into()))?;

    let g: Vec<Option<T>> = nodes.par_iter().map(|&w2| psi_integrand(pa, w2, config).ok()).collect();
    let mut first = ia;
    while first > 0 && g[first - 1].is_some() {
        first -= 1;
    }
    let mut last = ia;
    while last + 1 < nodes.len() && g[last + 1].is_some() {
        last += 1;
    }
    let nodes: Vec<T> = nodes[first..=last].to_vec();
    let dpsi: Vec<T> = g[first..=last].iter().map(|v| v.unwrap_or(T::zero())).collect();
    let ia = ia - first;

    let f = |w2: T| psi_integrand(pa, w2, config);
    let span = nodes[nodes.len() - 1] - nodes[0];
    let pieces: Vec<T> = (0..nodes.len() - 1)
        .into_par_iter()
        .map(|i| adaptive_simpson(&f, nodes[i], nodes[i + 1], T::lit(SIMPSON_TOL) * (nodes[i + 1] - nodes[i]) / span))
        .collect::<Result<_>>()?;
    let mut psi = vec![T::zero(); nodes.len()];
    for i in (ia + 1)..nodes.len() {
        psi[i] = psi[i - 1] + pieces[i - 1];
    }
    for i in (0..ia).rev() {
        psi[i] = psi[i + 1] - pieces[i];
    }
    Ok(PsiTable { p_anchor: pa, q_anchor: qa, nodes, psi, dpsi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_and_sine() {
        let f = |x: f64| Ok(3.0 * x * x);
        assert!((adaptive_simpson(&f, 0.0, 2.0, 1e-12).unwrap() - 8.0).abs() < 1e-12);
        let g = |x: f64| Ok(x.sin());
        assert!((adaptive_simpson(&g, 0.0, std::f64::consts::PI, 1e-10).unwrap() - 2.0).abs() < 1e-9);
    }
}
