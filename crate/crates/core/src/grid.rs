//! Windows I_j = (j delta, (j+1) delta] partitioning (0, u_max].

use crate::error::{Error, Result};

/// u_max = num / den split into r equal windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowGrid {
    pub umax_num: u64,
    pub umax_den: u64,
    pub r: u64,
}

impl WindowGrid {
    pub fn new(umax_num: u64, umax_den: u64, r: u64) -> Result<Self> {
        if r == 0 || umax_num == 0 || umax_den == 0 {
            return Err(Error::InvalidArgument("grid needs r >= 1 and u_max > 0".into()));
        }
        let g = num_integer::gcd(umax_num, umax_den);
        Ok(WindowGrid { umax_num: umax_num / g, umax_den: umax_den / g, r })
    }

    /// Unit interval split into r windows.
    pub fn unit(r: u64) -> Result<Self> {
        Self::new(1, 1, r)
    }

    /// Parse "a/b" or a decimal integer.
    pub fn parse_umax(s: &str) -> Result<(u64, u64)> {
        let bad = || Error::InvalidArgument(format!("u_max {s:?} is not a positive rational a/b"));
        match s.split_once('/') {
            Some((a, b)) => Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)),
            None => Ok((s.trim().parse().map_err(|_| bad())?, 1)),
        }
    }

    pub fn umax(&self) -> f64 {
        self.umax_num as f64 / self.umax_den as f64
    }

    pub fn delta(&self) -> f64 {
        self.umax() / self.r as f64
    }

    /// Midpoint u_j = (j + 1/2) delta.
    pub fn u_mid(&self, j: u64) -> f64 {
        (2 * j + 1) as f64 * self.umax_num as f64 / (2 * self.r * self.umax_den) as f64
    }

    /// floor(u_max N), the largest n with n / N in some window.
    pub fn n_max(&self, conductor: u64) -> u64 {
        (conductor as u128 * self.umax_num as u128 / self.umax_den as u128) as u64
    }

    /// Window index of n / N, or None when n / N is outside (0, u_max].
    ///
    /// j = ceil(n r den / (num N)) - 1, evaluated in integers.
    pub fn bin(&self, n: u64, conductor: u64) -> Option<u64> {
        if n == 0 || n > self.n_max(conductor) {
            return None;
        }
        let num = n as u128 * self.r as u128 * self.umax_den as u128;
        let den = self.umax_num as u128 * conductor as u128;
        Some((num.div_ceil(den) - 1) as u64)
    }

    /// Same u_max with r / factor windows.
    pub fn coarsen(&self, factor: u64) -> Result<Self> {
        if factor == 0 || self.r % factor != 0 {
            return Err(Error::InvalidArgument(format!("factor {factor} does not divide r = {}", self.r)));
        }
        Ok(WindowGrid { r: self.r / factor, ..*self })
    }
}
