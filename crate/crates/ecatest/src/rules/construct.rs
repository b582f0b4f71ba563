//! Constructors that rewrite a configuration locally to make windows final.

use super::meta::{PlantRequest, RuleMeta, Side};
use super::Parity;
use crate::Configuration;

/// Sets every location of `[x, y]` to `value`.
pub fn fill_interval(value: bool) -> impl Fn(&RuleMeta, &Configuration, usize, usize) -> Configuration {
    move |_, sigma, x, y| {
        let mut out = sigma.clone();
        for i in sigma.ring().interval_or_ring(x, y) {
            out.set(i, value);
        }
        out
    }
}

/// Each non-final location of `[x, y]` copies its nearest final location,
/// distance measured along the interval and ties going left. With
/// `alternate`, the copied value is XORed with the parity of that distance.
pub fn copy_nearest(alternate: bool) -> impl Fn(&RuleMeta, &Configuration, usize, usize) -> Configuration {
    move |meta, sigma, x, y| {
        let n = sigma.len();
        let ring = sigma.ring();
        let span = ring.interval_or_ring(x, y);
        let len = span.len();
        let whole = x == y;
        let finals: Vec<bool> = span.iter().map(|&i| meta.window_final(sigma, i)).collect();
        let mut prev = vec![None; len];
        let mut next = vec![None; len];
        // Seed the scans with the wrapped neighbors when the span is the ring.
        let mut last = if whole {
            (0..len).rev().find(|&j| finals[j]).map(|j| j as i64 - len as i64)
        } else {
            None
        };
        for j in 0..len {
            if finals[j] {
                last = Some(j as i64);
            }
            prev[j] = last;
        }
        let mut upcoming = if whole {
            (0..len).find(|&j| finals[j]).map(|j| (j + len) as i64)
        } else {
            None
        };
        for j in (0..len).rev() {
            if finals[j] {
                upcoming = Some(j as i64);
            }
            next[j] = upcoming;
        }
        let mut out = sigma.clone();
        for j in 0..len {
            if finals[j] {
                continue;
            }
            let left = prev[j].map(|p| (j as i64 - p, p));
            let right = next[j].map(|q| (q - j as i64, q));
            let (d, src) = match (left, right) {
                (Some(l), Some(r)) => {
                    if r.0 < l.0 {
                        r
                    } else {
                        l
                    }
                }
                (Some(l), None) => l,
                (None, Some(r)) => r,
                (None, None) => continue,
            };
            let src_loc = span[src.rem_euclid(len as i64) as usize];
            let value = sigma.get(src_loc) ^ (alternate && d % 2 == 1);
            out.set(span[j], value);
        }
        debug_assert_eq!(out.len(), n);
        out
    }
}

fn step(side: Side, z: usize, d: i64, n: usize) -> usize {
    let signed = match side {
        Side::Right => d,
        Side::Left => -d,
    };
    (z as i64 + signed).rem_euclid(n as i64) as usize
}

/// The bit the planted location must hold so that the prediction from it
/// equals `nu`, when it sits at distance `d` from `z`.
fn required_value(meta: &RuleMeta, req: &PlantRequest, d: usize) -> bool {
    // f is an involution in its first argument.
    meta.f_fwd(req.nu, req.gamma, Parity::of(d) ^ req.gamma_prime)
}

/// Radius 0: the neighbor of `z` is set directly.
pub fn plant_adjacent(meta: &RuleMeta, sigma: &Configuration, req: &PlantRequest) -> (Configuration, usize) {
    let n = sigma.len();
    let z1 = step(req.side, req.z, 1, n);
    let mut out = sigma.clone();
    out.set(z1, required_value(meta, req, 1));
    (out, z1)
}

/// Radius 1 with alternating non-final windows (`010`, `101`).
///
/// Let `b` be the neighbor of `z` on the planting side and `v` the required
/// value. If `v == b` the neighbor becomes final by doubling `b` one step
/// further; otherwise the next two cells are set to `v`.
pub fn plant_alternating(meta: &RuleMeta, sigma: &Configuration, req: &PlantRequest) -> (Configuration, usize) {
    let n = sigma.len();
    let at = |d| step(req.side, req.z, d, n);
    let b = sigma.get(at(1));
    let mut out = sigma.clone();
    let v1 = required_value(meta, req, 1);
    if v1 == b {
        out.set(at(2), b);
        (out, at(1))
    } else {
        let v2 = required_value(meta, req, 2);
        out.set(at(2), v2);
        out.set(at(3), v2);
        (out, at(2))
    }
}

/// Radius 1 with homogeneous non-final windows (`000`, `111`).
///
/// The run value `c` is broken either right after the neighbor of `z`, or
/// one cell later when the neighbor itself cannot carry the required value.
pub fn plant_homogeneous(meta: &RuleMeta, sigma: &Configuration, req: &PlantRequest) -> (Configuration, usize) {
    let n = sigma.len();
    let at = |d| step(req.side, req.z, d, n);
    let c = sigma.get(req.z);
    let mut out = sigma.clone();
    if required_value(meta, req, 1) == c {
        out.set(at(2), !c);
        (out, at(1))
    } else {
        out.set(at(2), c);
        out.set(at(3), !c);
        (out, at(2))
    }
}
