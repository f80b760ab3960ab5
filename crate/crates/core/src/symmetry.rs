//! Spin-permutation symmetry around the marked state.
//!
//! Every Hamiltonian in this crate is invariant under relabelling the spins,
//! once configurations are written relative to the marked state (`z = x ⊕ k`).
//! Operators that commute with that action block-diagonalise: the subspace
//! `W_j` of vectors odd under the swaps `(0 1), (2 3), …, (2j-2 2j-1)` and
//! even under permutations of the remaining `N - 2j` spins has one basis
//! vector per Hamming level `w ∈ [j, N-j]` and is invariant. Every distinct
//! eigenvalue shows up in one of the `⌊N/2⌋ + 1` blocks, so spectra at
//! `N = 12` reduce to a handful of matrices of size at most 13.

use nalgebra::DMatrix;

/// `2^w - 1`.
#[inline]
pub fn low_mask(w: usize) -> usize {
    if w >= usize::BITS as usize {
        usize::MAX
    } else {
        (1usize << w) - 1
    }
}

/// Binomial coefficient as a float (exact for the sizes used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Swap bits `a` and `b` of `z`.
#[inline]
fn swap_bits(z: usize, a: usize, b: usize) -> usize {
    let d = ((z >> a) ^ (z >> b)) & 1;
    z ^ (d << a) ^ (d << b)
}

/// Cyclic shift of the low `n` bits by one place.
#[inline]
fn rotate_bits(z: usize, n: usize) -> usize {
    ((z << 1) | (z >> (n - 1))) & low_mask(n)
}

/// Largest change of `entry(x, y)` under the two generators of the spin
/// permutation group acting around `center`. Zero means invariance.
pub fn invariance_defect(
    n_spins: usize,
    center: usize,
    entry: impl Fn(usize, usize) -> f64,
) -> f64 {
    if n_spins < 2 {
        return 0.0;
    }
    let n = 1usize << n_spins;
    let swap = |x: usize| center ^ swap_bits(x ^ center, 0, 1);
    let rot = |x: usize| center ^ rotate_bits(x ^ center, n_spins);
    let mut defect: f64 = 0.0;
    for y in 0..n {
        let (sy, ry) = (swap(y), rot(y));
        for x in 0..n {
            let v = entry(y, x);
            defect = defect
                .max((entry(sy, swap(x)) - v).abs())
                .max((entry(ry, rot(x)) - v).abs());
        }
    }
    defect
}

/// One invariant block: the restriction of a symmetric operator to `W_j`.
#[derive(Debug, Clone)]
pub struct ReducedBlock {
    pub j: usize,
    pub matrix: DMatrix<f64>,
}

/// Restrictions of a symmetric, permutation-invariant operator `A` (given
/// entrywise in gauge coordinates) to every `W_j`.
pub fn reduced_blocks(
    n_spins: usize,
    entry: impl Fn(usize, usize) -> f64,
) -> Vec<ReducedBlock> {
    let n = 1usize << n_spins;
    let mut blocks = Vec::with_capacity(n_spins / 2 + 1);
    for j in 0..=n_spins / 2 {
        let pair_mask = low_mask(2 * j);
        let size = n_spins - 2 * j + 1;
        // Support of the W_j basis: each pair in state 01 or 10.
        let mut support: Vec<(usize, usize, f64)> = Vec::with_capacity(n >> j);
        for z in 0..n {
            let mut sign = 1.0;
            let mut ok = true;
            for i in 0..j {
                match (z >> (2 * i)) & 0b11 {
                    0b01 => {}
                    0b10 => sign = -sign,
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                let level = j + (z & !pair_mask).count_ones() as usize;
                support.push((z, level, sign));
            }
        }
        let norms: Vec<f64> = (0..size)
            .map(|i| ((1u64 << j) as f64 * binomial(n_spins - 2 * j, i)).sqrt())
            .collect();
        let mut m = DMatrix::<f64>::zeros(size, size);
        for row in 0..size {
            let w = j + row;
            // Representative with value +1: low bit of every pair set, then
            // the lowest w - j of the free bits.
            let mut rep = 0usize;
            for i in 0..j {
                rep |= 1 << (2 * i);
            }
            rep |= low_mask(w - j) << (2 * j);
            let mut acc = vec![0.0; size];
            for &(z, level, sign) in &support {
                acc[level - j] += entry(rep, z) * sign;
            }
            for col in 0..size {
                m[(row, col)] = norms[row] * acc[col] / norms[col];
            }
        }
        let sym = (&m + m.transpose()) * 0.5;
        blocks.push(ReducedBlock { j, matrix: sym });
    }
    blocks
}

/// Exact lumping of a permutation-invariant chain started at the level-`w`
/// representative `(2^w - 1)` (gauge coordinates).
///
/// Classes are `(a, b)`: `a` spins set inside the start's support, `b`
/// outside. The chain of classes is Markov because the stabiliser of the start
/// acts transitively on each class.
pub struct LumpedStart {
    pub transition: DMatrix<f64>,
    pub start_class: usize,
    pub stationary: Vec<f64>,
}

pub fn lump_from_level(
    n_spins: usize,
    w: usize,
    entry: impl Fn(usize, usize) -> f64,
    stationary: impl Fn(usize) -> f64,
) -> LumpedStart {
    let n = 1usize << n_spins;
    let inside = low_mask(w);
    let outer = n_spins - w;
    let classes = (w + 1) * (outer + 1);
    let class_of = |z: usize| {
        let a = (z & inside).count_ones() as usize;
        let b = (z & !inside).count_ones() as usize;
        a * (outer + 1) + b
    };
    let mut pi = vec![0.0; classes];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for z in 0..n {
        let c = class_of(z);
        pi[c] += stationary(z);
        members[c].push(z);
    }
    let mut t = DMatrix::<f64>::zeros(classes, classes);
    for a in 0..=w {
        for b in 0..=outer {
            let c = a * (outer + 1) + b;
            let rep = low_mask(a) | (low_mask(b) << w);
            for (c2, zs) in members.iter().enumerate() {
                t[(c, c2)] = zs.iter().map(|&z| entry(rep, z)).sum();
            }
        }
    }
    LumpedStart {
        transition: t,
        start_class: w * (outer + 1),
        stationary: pi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(30, 15), 155_117_520.0);
        assert_eq!(binomial(3, 4), 0.0);
    }

    #[test]
    fn generators_move_bits() {
        assert_eq!(swap_bits(0b01, 0, 1), 0b10);
        assert_eq!(swap_bits(0b11, 0, 1), 0b11);
        assert_eq!(rotate_bits(0b100, 3), 0b001);
    }

    #[test]
    fn hamming_function_is_invariant() {
        let f = |x: usize, y: usize| ((x ^ y).count_ones() as f64).sin();
        assert_eq!(invariance_defect(5, 0b10110, f), 0.0);
        let g = |x: usize, y: usize| (x as f64) * 0.1 + y as f64;
        assert!(invariance_defect(4, 0, g) > 0.0);
    }

    #[test]
    fn blocks_reproduce_full_spectrum() {
        // Symmetric invariant operator: a function of (|x|, |y|, |x∧y|).
        let n_spins = 5;
        let n = 1 << n_spins;
        let f = |x: usize, y: usize| {
            let (wx, wy, ov) = (
                x.count_ones() as f64,
                y.count_ones() as f64,
                (x & y).count_ones() as f64,
            );
            (0.3 * (wx + wy) + 0.7 * ov).cos() + 0.1 * wx * wy
        };
        let full = DMatrix::from_fn(n, n, &f);
        let mut exact: Vec<f64> = full.symmetric_eigenvalues().iter().copied().collect();
        exact.sort_by(f64::total_cmp);
        let mut reduced: Vec<f64> = reduced_blocks(n_spins, f)
            .into_iter()
            .flat_map(|b| b.matrix.symmetric_eigenvalues().iter().copied().collect::<Vec<_>>())
            .collect();
        reduced.sort_by(f64::total_cmp);
        // Every reduced eigenvalue is an eigenvalue of the full operator ...
        for r in &reduced {
            assert!(exact.iter().any(|e| (e - r).abs() < 1e-10), "{r}");
        }
        // ... and every full eigenvalue appears among the reduced ones.
        for e in &exact {
            assert!(reduced.iter().any(|r| (e - r).abs() < 1e-10), "{e}");
        }
    }
}
