//! Karmarkar–Karp differencing with sign reconstruction.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use super::SolverOutput;
use crate::error::{Error, Result};
use crate::scalar::Real;

struct Item<F> {
    value: F,
    seq: Reverse<usize>,
    rep: usize,
}

impl<F: Real> PartialEq for Item<F> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<F: Real> Eq for Item<F> {}

impl<F: Real> PartialOrd for Item<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<F: Real> Ord for Item<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .partial_cmp(&other.value)
            .unwrap_or(Ordering::Equal)
            .then(self.seq.cmp(&other.seq))
    }
}

/// Repeatedly replaces the two largest magnitudes by their difference.
///
/// Each step records that the two combined groups take opposite signs; the
/// edges form a spanning tree whose 2-colouring is the returned `x`
/// (normalized to `x_1 = +1`). Equal values are taken in input order.
pub fn karmarkar_karp<F: Real>(a: &[F]) -> Result<SolverOutput> {
    let m = a.len();
    if m == 0 {
        return Err(Error::Solver("empty instance".into()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("solver input"));
    }
    let mut heap: BinaryHeap<Item<F>> = a
        .iter()
        .enumerate()
        .map(|(i, v)| Item {
            value: v.abs(),
            seq: Reverse(i),
            rep: i,
        })
        .collect();
    let mut adj: Vec<Vec<usize>> = vec![vec![]; m];
    let mut seq = m;
    while heap.len() > 1 {
        let big = heap.pop().expect("len > 1");
        let small = heap.pop().expect("len > 1");
        adj[big.rep].push(small.rep);
        adj[small.rep].push(big.rep);
        heap.push(Item {
            value: big.value - small.value,
            seq: Reverse(seq),
            rep: big.rep,
        });
        seq += 1;
    }
    let kk_value = heap.pop().expect("one item left").value;

    let mut colour = vec![0i64; m];
    colour[0] = 1;
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if colour[v] == 0 {
                colour[v] = -colour[u];
                queue.push_back(v);
            }
        }
    }
    let x: Vec<i64> = colour
        .iter()
        .zip(a)
        .map(|(&c, v)| if v.is_sign_negative() { -c } else { c })
        .collect();
    let x = if x[0] < 0 {
        x.iter().map(|v| -v).collect()
    } else {
        x
    };
    let achieved = a
        .iter()
        .zip(&x)
        .fold(F::zero(), |acc, (&v, &xi)| acc + v * F::of(xi as f64))
        .abs();
    let scale = a.iter().fold(F::zero(), |s, v| s + v.abs()).max(F::one());
    if (achieved - kk_value).abs() > F::of(1e-9) * scale {
        return Err(Error::Solver(format!(
            "sign reconstruction gives {achieved}, differencing gave {kk_value}"
        )));
    }
    Ok(SolverOutput {
        x,
        value: achieved.as_f64(),
        solver: "karmarkar_karp".into(),
        budget_used: m as u64 - 1,
    })
}
