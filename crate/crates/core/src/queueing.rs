//! Service-reliability intensity coefficients for multi-server node-charges.
//!
//! For `m` servers, queue bound `b` and reliability `eta`, the admissible
//! intensity `rho` is the root of
//!
//! ```text
//! sum_{k=0}^{m-1} (m - k) m! m^b / k! * rho^-(m + b + 1 - k) = 1 / (1 - eta)
//! ```
//!
//! The left side is strictly decreasing in `rho`, so any `rho` below the root
//! satisfies the reliability requirement.

use crate::error::{Error, Result};

/// Largest server count whose factorial still fits in `u64`.
pub const MAX_SERVERS: usize = 20;

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Left-hand side of the reliability condition at intensity `rho`.
pub fn eq17_lhs(rho: f64, servers: usize, queue_bound: u32) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Queueing(format!("intensity must be positive, got {rho}")));
    }
    if servers == 0 || servers > MAX_SERVERS {
        return Err(Error::Queueing(format!(
            "server count must be in 1..={MAX_SERVERS}, got {servers}"
        )));
    }
    let m = servers;
    let m_fact = factorial(m);
    let m_pow_b = (m as f64).powi(queue_bound as i32);
    let mut total = 0.0;
    for k in 0..m {
        // m!/k! is exact in integers for m <= 20.
        let ratio = (m_fact / factorial(k)) as f64;
        let coeff = (m - k) as f64 * ratio * m_pow_b;
        let exponent = (m as i32) + queue_bound as i32 + 1 - k as i32;
        total += coeff * rho.powi(-exponent);
    }
    Ok(total)
}

/// Root of the reliability condition for `servers` servers.
///
/// Brackets from `[1e-9, 1]`, doubling the upper end until the left side drops
/// below `1 / (1 - eta)`, then bisects until the bracket cannot shrink further
/// in double precision.
pub fn solve_rho(servers: usize, queue_bound: u32, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Queueing(format!("reliability must lie in (0, 1), got {eta}")));
    }
    let target = 1.0 / (1.0 - eta);
    let f = |rho: f64| eq17_lhs(rho, servers, queue_bound).map(|v| v - target);

    let mut lo = 1e-9;
    let mut hi = 1.0;
    while f(hi)? >= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    if f(lo)? < 0.0 {
        // Root below the bracket floor; only reachable for eta absurdly close to 0.
        return Err(Error::Queueing(format!(
            "intensity root below {lo:e} for m={servers}, b={queue_bound}, eta={eta}"
        )));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Both ends are within one ulp; return the one with the smaller residual.
    Ok(if f(lo)?.abs() <= f(hi)?.abs() { lo } else { hi })
}

/// Intensity coefficients `rho[m]` for `m = 1..=C`.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoTable {
    values: Vec<f64>,
    source: Option<(f64, u32)>,
}

impl RhoTable {
    /// Solves the reliability condition for every server count up to `max_servers`.
    pub fn solve(eta: f64, queue_bound: u32, max_servers: usize) -> Result<Self> {
        let values = (1..=max_servers)
            .map(|m| solve_rho(m, queue_bound, eta))
            .collect::<Result<Vec<_>>>()?;
        let mut table = Self::from_values(values)?;
        table.source = Some((eta, queue_bound));
        Ok(table)
    }

    /// Wraps an explicit table; it must be positive and strictly increasing.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Queueing("rho table is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Queueing(format!("rho entries must be positive, got {v}")));
        }
        if let Some(w) = values.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Queueing(format!(
                "rho table must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
        Ok(RhoTable { values, source: None })
    }

    /// `rho` for `servers` servers (1-based).
    pub fn rho(&self, servers: usize) -> f64 {
        self.values[servers - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_servers(&self) -> usize {
        self.values.len()
    }

    /// `(eta, b)` when the table was solved rather than given.
    pub fn source(&self) -> Option<(f64, u32)> {
        self.source
    }
}

/// Per-added-server capacity increments `mu * (rho[m] - rho[m-1])`, with
/// `rho[0] = 0`. The `m`-th entry multiplies the `m`-th server indicator in
/// the queueing capacity row.
pub fn capacity_coefficients(table: &RhoTable, mu: f64) -> Result<Vec<f64>> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Queueing(format!("service rate must be positive, got {mu}")));
    }
    let values = table.values();
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Queueing("rho table is not strictly increasing".into()));
    }
    let mut prev = 0.0;
    Ok(values
        .iter()
        .map(|&r| {
            let inc = mu * (r - prev);
            prev = r;
            inc
        })
        .collect())
}
