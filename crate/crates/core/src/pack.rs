//! Packing numbers: the largest number of points pairwise more than `ε` apart.
//!
//! Exact mode is a maximum-clique search in the "far apart" graph, with
//! vertex sets packed into a `u64` and a greedy-colouring bound (Tomita
//! style). Greedy mode is farthest-point insertion and only gives a lower
//! bound.

use alloc::vec::Vec;

use crate::metric::MetricSource;
use crate::{Error, FiniteMetricSpace, Result};

/// Largest sample handled by the exact search.
pub const EXACT_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PackMode {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packing {
    pub count: usize,
    /// Sorted indices of a packing of size `count`.
    pub witness: Vec<usize>,
    /// False for greedy results, which only bound the packing number below.
    pub exact: bool,
}

pub fn pack(m: &FiniteMetricSpace, eps: f64, mode: PackMode) -> Result<Packing> {
    match mode {
        PackMode::Exact => pack_exact(m, eps),
        PackMode::Greedy => Ok(pack_greedy(m, eps)),
    }
}

/// Exact packing number for at most [`EXACT_CAP`] points.
pub fn pack_exact(m: &FiniteMetricSpace, eps: f64) -> Result<Packing> {
    let n = m.len();
    if n > EXACT_CAP {
        return Err(Error::PackCap { n, cap: EXACT_CAP });
    }
    if n == 0 {
        return Ok(Packing {
            count: 0,
            witness: Vec::new(),
            exact: true,
        });
    }
    let far: Vec<u64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && m.dist(i, j) > eps)
                .fold(0u64, |acc, j| acc | (1u64 << j))
        })
        .collect();
    let mut search = Clique {
        far: &far,
        best: 0,
        best_len: 0,
    };
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    search.expand(0, 0, all);
    Ok(Packing {
        count: search.best_len,
        witness: bits(search.best),
        exact: true,
    })
}

struct Clique<'a> {
    far: &'a [u64],
    best: u64,
    best_len: usize,
}

impl Clique<'_> {
    fn expand(&mut self, current: u64, len: usize, mut cand: u64) {
        if cand == 0 {
            if len > self.best_len {
                self.best_len = len;
                self.best = current;
            }
            return;
        }
        let (order, colors) = self.color(cand);
        for k in (0..order.len()).rev() {
            if len + colors[k] <= self.best_len {
                return;
            }
            let v = order[k];
            self.expand(current | (1 << v), len + 1, cand & self.far[v]);
            cand &= !(1u64 << v);
        }
    }

    /// Greedy colouring of `cand`; vertices in colour order with the running
    /// colour count, an upper bound on any clique among the first `k + 1`.
    fn color(&self, cand: u64) -> (Vec<usize>, Vec<usize>) {
        let mut order = Vec::with_capacity(cand.count_ones() as usize);
        let mut colors = Vec::with_capacity(order.capacity());
        let mut uncolored = cand;
        let mut color = 0;
        while uncolored != 0 {
            color += 1;
            let mut avail = uncolored;
            while avail != 0 {
                let v = avail.trailing_zeros() as usize;
                avail &= !(1u64 << v);
                avail &= !self.far[v];
                uncolored &= !(1u64 << v);
                order.push(v);
                colors.push(color);
            }
        }
        (order, colors)
    }
}

fn bits(mut x: u64) -> Vec<usize> {
    let mut out = Vec::new();
    while x != 0 {
        let v = x.trailing_zeros() as usize;
        out.push(v);
        x &= x - 1;
    }
    out
}

/// Farthest-point insertion starting from point 0. Works on any
/// [`MetricSource`], so graph metrics beyond the dense cap can be packed.
pub fn pack_greedy<M: MetricSource + ?Sized>(m: &M, eps: f64) -> Packing {
    let n = m.len();
    if n == 0 {
        return Packing {
            count: 0,
            witness: Vec::new(),
            exact: false,
        };
    }
    let mut chosen = alloc::vec![0usize];
    let mut gap = m.distances_from(0);
    loop {
        let (next, far) = gap
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, d)| if d > b.1 { (i, d) } else { b });
        if far <= eps {
            break;
        }
        chosen.push(next);
        for (g, d) in gap.iter_mut().zip(m.distances_from(next)) {
            *g = g.min(d);
        }
    }
    chosen.sort_unstable();
    Packing {
        count: chosen.len(),
        witness: chosen,
        exact: false,
    }
}

/// Checks that `idx` is pairwise more than `eps` apart.
pub fn is_packing(m: &FiniteMetricSpace, eps: f64, idx: &[usize]) -> bool {
    idx.iter()
        .enumerate()
        .all(|(a, &i)| idx[a + 1..].iter().all(|&j| m.dist(i, j) > eps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_points_on_a_line() {
        let m = FiniteMetricSpace::on_line(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let p = pack_exact(&m, 1.5).unwrap();
        assert_eq!(p.count, 3);
        assert_eq!(p.witness, [0, 2, 4]);
        assert!(p.exact);
    }

    #[test]
    fn eps_above_diameter_gives_one() {
        let m = FiniteMetricSpace::on_line(&[0.0, 0.3, 1.0]).unwrap();
        assert_eq!(pack_exact(&m, 1.0).unwrap().count, 1);
        assert_eq!(pack_greedy(&m, 1.0).count, 1);
    }

    #[test]
    fn strict_inequality_at_ties() {
        let m = FiniteMetricSpace::on_line(&[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(pack_exact(&m, 1.0).unwrap().count, 2);
        assert_eq!(pack_exact(&m, 0.999).unwrap().count, 3);
    }

    #[test]
    fn exact_refuses_large_samples() {
        let xs: alloc::vec::Vec<f64> = (0..65).map(|i| i as f64).collect();
        let m = FiniteMetricSpace::on_line(&xs).unwrap();
        assert_eq!(pack_exact(&m, 0.5).unwrap_err(), Error::PackCap { n: 65, cap: 64 });
        let g = pack(&m, 0.5, PackMode::Greedy).unwrap();
        assert_eq!(g.count, 65);
        assert!(!g.exact);
    }

    #[test]
    fn full_64_points() {
        let xs: alloc::vec::Vec<f64> = (0..64).map(|i| i as f64).collect();
        let m = FiniteMetricSpace::on_line(&xs).unwrap();
        assert_eq!(pack_exact(&m, 0.5).unwrap().count, 64);
        assert_eq!(pack_exact(&m, 1.5).unwrap().count, 32);
    }

    #[test]
    fn greedy_witness_is_a_packing() {
        let xs = [0.0, 0.1, 0.55, 0.6, 1.0, 1.4];
        let m = FiniteMetricSpace::on_line(&xs).unwrap();
        let g = pack_greedy(&m, 0.35);
        assert!(is_packing(&m, 0.35, &g.witness));
        assert!(g.count <= pack_exact(&m, 0.35).unwrap().count);
    }
}
