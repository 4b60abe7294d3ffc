use crate::error::{Error, Result};

/// Minimizes `w . d` over `0 <= w <= 1`, `sum(w) >= m_prime`.
///
/// The polytope is a box cut by one halfspace, so the optimum fills the
/// smallest costs first: `floor(m_prime)` ones, the fractional remainder on
/// the next cheapest entry, zeros elsewhere. Equal costs go to the lower index.
pub fn solve_temporal_weights(d: &[f64], m_prime: f64) -> Result<Vec<f64>> {
    if let Some(x) = d.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::invalid(format!("patch difference {x} must be finite and non-negative")));
    }
    if !(m_prime > 0.0) {
        return Err(Error::invalid(format!("lower bound {m_prime} must be positive")));
    }
    if m_prime > d.len() as f64 {
        return Err(Error::Infeasible {
            lower_bound: m_prime,
            count: d.len(),
        });
    }
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    let full = m_prime.floor() as usize;
    let remainder = m_prime - full as f64;
    let mut w = vec![0.0; d.len()];
    for &i in &order[..full] {
        w[i] = 1.0;
    }
    if remainder > 0.0 {
        w[order[full]] = remainder;
    }
    Ok(w)
}
