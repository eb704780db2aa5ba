//! Explicit bijections between positive indices and `Z^d` for d = 2, 3, 4.
//!
//! The planar map is the counter-clockwise square spiral ("snake") that
//! starts at the origin with index 1 and first steps to `(1, 0)`. Ring `r`
//! (points with `max(|x|, |y|) = r`) holds indices `(2r-1)^2 + 1 ..= (2r+1)^2`,
//! beginning at `(r, 1-r)` and walking up the right edge, along the top,
//! down the left edge and along the bottom.
//!
//! Higher dimensions compose the spiral with the zigzag map
//! `1, 2, 3, 4, 5, … ↦ 0, 1, -1, 2, -2, …`:
//!
//! * d = 3: `(x, y, z) ↦ snake⁻¹(x, zig(snake⁻¹(y, z)))`
//! * d = 4: `(p, q, r, s) ↦ snake⁻¹(zig(snake⁻¹(p, q)), zig(snake⁻¹(r, s)))`
//!
//! Every point of the box `[-M, M]^d` has an index at most
//! [`covering_bound`]`(d, M) = (2M+1)^4` for d = 3, 4 and `(2M+1)^2` for d = 2.

use std::fmt;

use crate::error::{Error, Result};

/// Supported lattice dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Two,
    Three,
    Four,
}

impl Dimension {
    pub fn new(d: usize) -> Result<Self> {
        match d {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            4 => Ok(Dimension::Four),
            other => Err(Error::UnsupportedDimension(other)),
        }
    }

    pub fn get(self) -> usize {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
            Dimension::Four => 4,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.get().fmt(f)
    }
}

/// The `k`-th point of the spiral, `k ≥ 1`.
pub fn snake_forward(k: u64) -> Result<(i64, i64)> {
    if k == 0 {
        return Err(Error::ZeroIndex);
    }
    if k == 1 {
        return Ok((0, 0));
    }
    let r = (k - 1).isqrt().div_ceil(2) as i64;
    let ring_start = {
        let side = 2 * r as u64 - 1;
        side * side + 1
    };
    let t = (k - ring_start) as i64;
    let edge = 2 * r;
    let pos = t % edge;
    Ok(match t / edge {
        0 => (r, 1 - r + pos),
        1 => (r - 1 - pos, r),
        2 => (-r, r - 1 - pos),
        _ => (1 - r + pos, -r),
    })
}

/// Index of `(x, y)` on the spiral.
///
/// Fails with [`Error::Overflow`] only when the index leaves `u64`.
pub fn snake_inverse(x: i64, y: i64) -> Result<u64> {
    let r = x.unsigned_abs().max(y.unsigned_abs()) as u128;
    if r == 0 {
        return Ok(1);
    }
    let (x, y, ri) = (x as i128, y as i128, r as i128);
    let t = if x == ri && y > -ri {
        y + ri - 1
    } else if y == ri {
        2 * ri + (ri - 1 - x)
    } else if x == -ri {
        4 * ri + (ri - 1 - y)
    } else {
        6 * ri + (x + ri - 1)
    };
    let side = 2 * r - 1;
    let k = side * side + 1 + t as u128;
    u64::try_from(k).map_err(|_| Error::Overflow("spiral index"))
}

/// `1, 2, 3, 4, 5, … ↦ 0, 1, -1, 2, -2, …`
#[inline]
pub fn zigzag_forward(j: u64) -> Result<i64> {
    if j == 0 {
        return Err(Error::ZeroIndex);
    }
    Ok(if j.is_multiple_of(2) { (j / 2) as i64 } else { -(((j - 1) / 2) as i64) })
}

#[inline]
pub fn zigzag_inverse(z: i64) -> Result<u64> {
    let j = if z > 0 { 2 * z as i128 } else { 1 - 2 * z as i128 };
    u64::try_from(j).map_err(|_| Error::Overflow("zigzag index"))
}

pub fn forward3(k: u64) -> Result<[i64; 3]> {
    let (x, w) = snake_forward(k)?;
    let (y, z) = snake_forward(zigzag_inverse(w)?)?;
    Ok([x, y, z])
}

pub fn inverse3(p: [i64; 3]) -> Result<u64> {
    let inner = snake_inverse(p[1], p[2])?;
    snake_inverse(p[0], zigzag_forward(inner)?)
}

pub fn forward4(k: u64) -> Result<[i64; 4]> {
    let (u, v) = snake_forward(k)?;
    let (p, q) = snake_forward(zigzag_inverse(u)?)?;
    let (r, s) = snake_forward(zigzag_inverse(v)?)?;
    Ok([p, q, r, s])
}

pub fn inverse4(p: [i64; 4]) -> Result<u64> {
    let left = snake_inverse(p[0], p[1])?;
    let right = snake_inverse(p[2], p[3])?;
    snake_inverse(zigzag_forward(left)?, zigzag_forward(right)?)
}

/// Forward map for a runtime dimension.
pub fn zd_forward(d: usize, k: u64) -> Result<Vec<i64>> {
    match Dimension::new(d)? {
        Dimension::Two => snake_forward(k).map(|(x, y)| vec![x, y]),
        Dimension::Three => forward3(k).map(Vec::from),
        Dimension::Four => forward4(k).map(Vec::from),
    }
}

/// Inverse map for a runtime dimension; `point.len()` must equal `d`.
pub fn zd_inverse(d: usize, point: &[i64]) -> Result<u64> {
    let dim = Dimension::new(d)?;
    if point.len() != d {
        return Err(Error::Domain(format!("expected a point with {d} coordinates, got {}", point.len())));
    }
    match dim {
        Dimension::Two => snake_inverse(point[0], point[1]),
        Dimension::Three => inverse3([point[0], point[1], point[2]]),
        Dimension::Four => inverse4([point[0], point[1], point[2], point[3]]),
    }
}

/// An index `N` such that every point of `[-M, M]^d` appears among indices `1..=N`.
pub fn covering_bound(d: usize, m: u64) -> Result<u64> {
    let side = m
        .checked_mul(2)
        .and_then(|v| v.checked_add(1))
        .ok_or(Error::Overflow("covering bound"))?;
    let exp = match Dimension::new(d)? {
        Dimension::Two => 2,
        Dimension::Three | Dimension::Four => 4,
    };
    side.checked_pow(exp).ok_or(Error::Overflow("covering bound"))
}
