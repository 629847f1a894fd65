//! Two abelian actions on lines given by integer homomorphisms `φ_1, φ_2 : F → Z`.
//!
//! The core of such a pair is empty exactly when the length functions are
//! homothetic; otherwise it is the plane tiled by unit squares and the
//! intersection number is the covolume of the image lattice in `Z^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row `i` holds the values of `φ_i` on the free basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeHom {
    pub matrix: [Vec<i64>; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Emptiness {
    Empty,
    Nonempty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "index", rename_all = "UPPERCASE")]
pub enum Covolume {
    Empty,
    Index(u64),
}

impl LatticeHom {
    pub fn new(r1: Vec<i64>, r2: Vec<i64>) -> Self {
        LatticeHom { matrix: [r1, r2] }
    }

    fn check(&self) -> Result<()> {
        if self.matrix[0].len() != self.matrix[1].len() {
            return Err(Error::Parse("rows of different lengths".into()));
        }
        for (i, row) in self.matrix.iter().enumerate() {
            if row.iter().all(|&x| x == 0) {
                return Err(Error::ZeroRow { row: i });
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        let n = self.matrix[0].len();
        let [r1, r2] = &self.matrix;
        let nonzero_minor =
            (0..n).any(|i| (i + 1..n).any(|j| r1[i] as i128 * r2[j] as i128 != r1[j] as i128 * r2[i] as i128));
        if nonzero_minor {
            2
        } else if r1.iter().chain(r2).any(|&x| x != 0) {
            1
        } else {
            0
        }
    }
}

pub fn classify_empty(l: &LatticeHom) -> Result<Emptiness> {
    l.check()?;
    Ok(if l.rank() == 1 { Emptiness::Empty } else { Emptiness::Nonempty })
}

/// Diagonal of the Smith normal form of a `2 × n` integer matrix.
pub fn smith_divisors(l: &LatticeHom) -> [u64; 2] {
    let mut m: Vec<Vec<i128>> = l.matrix.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let n = m[0].len();
    let mut divisors = [0u64; 2];
    for k in 0..2.min(n) {
        loop {
            // Move the smallest nonzero entry of the trailing block to (k, k).
            let mut best: Option<(usize, usize)> = None;
            for i in k..2 {
                for j in k..n {
                    if m[i][j] != 0 && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { return divisors };
            m.swap(k, bi);
            for row in m.iter_mut() {
                row.swap(k, bj);
            }
            let p = m[k][k];
            let mut clean = true;
            for j in k + 1..n {
                let q = m[k][j] / p;
                for row in m.iter_mut() {
                    row[j] -= q * row[k];
                }
                clean &= m[k][j] == 0;
            }
            for i in k + 1..2 {
                let q = m[i][k] / p;
                let (top, bottom) = m.split_at_mut(i);
                for j in 0..n {
                    bottom[0][j] -= q * top[k][j];
                }
                clean &= m[i][k] == 0;
            }
            if !clean {
                continue;
            }
            // Divisibility: fold a non-multiple in the trailing block into row k.
            let bad = (k + 1..2).flat_map(|i| (k + 1..n).map(move |j| (i, j))).find(|&(i, j)| m[i][j] % p != 0);
            match bad {
                Some((i, _)) => {
                    let (top, bottom) = m.split_at_mut(i);
                    for j in 0..n {
                        top[k][j] += bottom[0][j];
                    }
                }
                None => break,
            }
        }
        divisors[k] = m[k][k].unsigned_abs() as u64;
    }
    divisors
}

/// Index of `φ(Z^n)` in `Z^2`.
pub fn lattice_index(l: &LatticeHom) -> Result<u64> {
    l.check()?;
    let rank = l.rank();
    if rank < 2 {
        return Err(Error::RankDeficient { rank });
    }
    let [d1, d2] = smith_divisors(l);
    Ok(d1 * d2)
}

pub fn abelian_core_covolume(l: &LatticeHom) -> Result<Covolume> {
    match classify_empty(l)? {
        Emptiness::Empty => Ok(Covolume::Empty),
        Emptiness::Nonempty => Ok(Covolume::Index(lattice_index(l)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn lh(r1: &[i64], r2: &[i64]) -> LatticeHom {
        LatticeHom::new(r1.to_vec(), r2.to_vec())
    }

    /// gcd of the 2x2 minors: the second determinantal divisor.
    fn minors_gcd(l: &LatticeHom) -> u64 {
        let [r1, r2] = &l.matrix;
        let mut g = 0i128;
        for i in 0..r1.len() {
            for j in i + 1..r1.len() {
                let d = r1[i] as i128 * r2[j] as i128 - r1[j] as i128 * r2[i] as i128;
                g = gcd(g, d.abs());
            }
        }
        g as u64
    }

    fn gcd(a: i128, b: i128) -> i128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_empty(&lh(&[1, 0], &[1, 0])).unwrap(), Emptiness::Empty);
        assert_eq!(classify_empty(&lh(&[1, 0], &[-2, 0])).unwrap(), Emptiness::Empty);
        assert_eq!(classify_empty(&lh(&[1, 0], &[0, 1])).unwrap(), Emptiness::Nonempty);
        assert!(matches!(classify_empty(&lh(&[0, 0], &[0, 1])), Err(Error::ZeroRow { row: 0 })));
    }

    #[test]
    fn index_examples() {
        assert_eq!(lattice_index(&lh(&[1, 0], &[0, 1])).unwrap(), 1);
        assert_eq!(lattice_index(&lh(&[2, 0], &[0, 3])).unwrap(), 6);
        assert_eq!(lattice_index(&lh(&[2, 4], &[6, 8])).unwrap(), 8);
        assert!(matches!(lattice_index(&lh(&[1, 2], &[2, 4])), Err(Error::RankDeficient { rank: 1 })));
        assert_eq!(abelian_core_covolume(&lh(&[1, 0, 2], &[0, 1, 1])).unwrap(), Covolume::Index(1));
        assert_eq!(abelian_core_covolume(&lh(&[1, 2], &[3, 6])).unwrap(), Covolume::Empty);
    }

    #[test]
    fn divisors_divide() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let n = rng.gen_range(2..5);
            let r1: Vec<i64> = (0..n).map(|_| rng.gen_range(-9..=9)).collect();
            let r2: Vec<i64> = (0..n).map(|_| rng.gen_range(-9..=9)).collect();
            let l = lh(&r1, &r2);
            let [d1, d2] = smith_divisors(&l);
            if d1 != 0 && d2 != 0 {
                assert_eq!(d2 % d1, 0, "{l:?}");
            }
            if l.check().is_ok() && l.rank() == 2 {
                assert_eq!(lattice_index(&l).unwrap(), minors_gcd(&l), "{l:?}");
            }
        }
    }

    #[test]
    fn unimodular_invariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let base = lh(&[2, 1, 4], &[0, 3, 3]);
        let idx = lattice_index(&base).unwrap();
        for _ in 0..20 {
            let mut l = base.clone();
            // Right multiplication: add a multiple of one column to another.
            let (i, j) = (rng.gen_range(0..3), rng.gen_range(0..3));
            if i != j {
                let k = rng.gen_range(-3..=3);
                for row in l.matrix.iter_mut() {
                    row[j] += k * row[i];
                }
            }
            // Left multiplication: row addition or swap.
            if rng.gen_bool(0.5) {
                l.matrix.swap(0, 1);
            } else {
                let k = rng.gen_range(-3..=3);
                let r0 = l.matrix[0].clone();
                for (x, y) in l.matrix[1].iter_mut().zip(r0) {
                    *x += k * y;
                }
            }
            assert_eq!(lattice_index(&l).unwrap(), idx);
        }
    }
}
