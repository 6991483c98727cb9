//! Bitmask kernels for graphs with at most 64 nodes.

use alloc::vec::Vec;

use crate::{Error, Result};

#[inline]
pub(crate) fn full(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[inline]
pub(crate) fn lowbit(mask: u64) -> u64 {
    mask & mask.wrapping_neg()
}

pub(crate) struct Bits(u64);

impl Iterator for Bits {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

#[inline]
pub(crate) fn bits(mask: u64) -> Bits {
    Bits(mask)
}

/// Open neighbourhood union of `mask`.
#[inline]
pub(crate) fn neighbourhood(adj: &[u64], mask: u64) -> u64 {
    bits(mask).fold(0, |acc, v| acc | adj[v])
}

/// Connected component of `within` containing the lowest bit of `seed`.
#[inline]
pub(crate) fn flood(adj: &[u64], seed: u64, within: u64) -> u64 {
    let mut comp = seed;
    let mut frontier = seed;
    loop {
        let next = neighbourhood(adj, frontier) & within & !comp;
        if next == 0 {
            return comp;
        }
        comp |= next;
        frontier = next;
    }
}

/// Components of the subgraph induced by `within`, ordered by smallest member.
pub(crate) fn components(adj: &[u64], within: u64, out: &mut Vec<u64>) {
    out.clear();
    let mut rest = within;
    while rest != 0 {
        let comp = flood(adj, lowbit(rest), rest);
        out.push(comp);
        rest &= !comp;
    }
}

#[inline]
pub(crate) fn is_connected(adj: &[u64], mask: u64) -> bool {
    mask != 0 && flood(adj, lowbit(mask), mask) == mask
}

/// Lexicographic order of the sorted member lists of two equal-size masks.
#[inline]
pub(crate) fn lex_less(a: u64, b: u64) -> bool {
    let diff = a ^ b;
    diff != 0 && a & lowbit(diff) != 0
}

/// Binomial coefficient, saturating at `u64::MAX`.
pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Visit every `k`-subset of `0..n` as a mask, in lexicographic order.
pub(crate) fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(u64)) {
    if k > n {
        return;
    }
    if k == 0 {
        f(0);
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(idx.iter().fold(0u64, |m, &i| m | 1 << i));
        let mut i = k - 1;
        while idx[i] == i + n - k {
            if i == 0 {
                return;
            }
            i -= 1;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Enumerate every connected induced subgraph with at most `max_size` nodes,
/// each exactly once. Returns the number of sets visited.
pub(crate) fn for_each_connected_subset(
    adj: &[u64],
    n: usize,
    max_size: usize,
    cap: u64,
    mut f: impl FnMut(u64),
) -> Result<u64> {
    struct Walk<'a, F> {
        adj: &'a [u64],
        max_size: usize,
        cap: u64,
        count: u64,
        f: F,
    }

    impl<F: FnMut(u64)> Walk<'_, F> {
        fn rec(&mut self, set: u64, size: usize, mut cand: u64, mut banned: u64) -> bool {
            self.count += 1;
            if self.count > self.cap {
                return false;
            }
            (self.f)(set);
            if size == self.max_size {
                return true;
            }
            while cand != 0 {
                let w = lowbit(cand);
                cand ^= w;
                let grown = set | w;
                let v = w.trailing_zeros() as usize;
                let next = (cand | self.adj[v]) & !grown & !banned;
                if !self.rec(grown, size + 1, next, banned) {
                    return false;
                }
                banned |= w;
            }
            true
        }
    }

    if max_size == 0 || n == 0 {
        return Ok(0);
    }
    let mut walk = Walk {
        adj,
        max_size,
        cap,
        count: 0,
        f: &mut f,
    };
    for root in 0..n {
        let below = full(root + 1);
        let cand = adj[root] & !below;
        if !walk.rec(1 << root, 1, cand, below) {
            return Err(Error::LimitExceeded {
                what: "connected subset enumeration",
                size: walk.count,
                limit: cap,
            });
        }
    }
    Ok(walk.count)
}
