use crate::error::{Error, Result};

/// Toeplitz hashing `{0,1}^n -> {0,1}^l` over GF(2).
///
/// Seed `s` has `n + l - 1` bits and `T[i][j] = s[i - j + n - 1]`.
#[derive(Clone, Debug)]
pub struct ToeplitzHashFamily {
    n: u32,
    l: u32,
}

/// Seeds and inputs are packed into `u32`.
const MAX_SEED_BITS: u32 = 24;

impl ToeplitzHashFamily {
    pub fn new(n: u32, l: u32) -> Result<Self> {
        if n == 0 || l > n {
            return Err(Error::usage(format!(
                "need 1 <= n and l <= n, got n={n}, l={l}"
            )));
        }
        if n + l > MAX_SEED_BITS {
            return Err(Error::resource(format!(
                "seed space 2^{} is too large",
                n + l - 1
            )));
        }
        Ok(ToeplitzHashFamily { n, l })
    }

    pub fn input_bits(&self) -> u32 {
        self.n
    }

    pub fn output_bits(&self) -> u32 {
        self.l
    }

    pub fn seed_bits(&self) -> u32 {
        (self.n + self.l).saturating_sub(1)
    }

    pub fn seed_count(&self) -> usize {
        1 << self.seed_bits()
    }

    /// Row masks of the matrix for `seed`: bit `j` of row `i` is `T[i][j]`.
    pub fn rows(&self, seed: u32) -> Vec<u32> {
        let n = self.n as i64;
        (0..self.l as i64)
            .map(|i| {
                (0..n).fold(0u32, |acc, j| {
                    let bit = (seed >> (i - j + n - 1)) & 1;
                    acc | (bit << j)
                })
            })
            .collect()
    }

    pub fn hash_with_rows(rows: &[u32], x: u32) -> u32 {
        rows.iter()
            .enumerate()
            .fold(0u32, |acc, (i, &r)| acc | (((r & x).count_ones() & 1) << i))
    }

    pub fn hash(&self, seed: u32, x: u32) -> u32 {
        Self::hash_with_rows(&self.rows(seed), x)
    }

    /// Largest collision probability over distinct input pairs, by
    /// enumerating every seed and pair.
    pub fn max_collision_probability(&self) -> f64 {
        let inputs = 1u32 << self.n;
        let tables: Vec<Vec<u32>> = (0..self.seed_count() as u32)
            .map(|s| {
                let rows = self.rows(s);
                (0..inputs)
                    .map(|x| Self::hash_with_rows(&rows, x))
                    .collect()
            })
            .collect();
        let mut worst = 0usize;
        for x in 0..inputs as usize {
            for y in x + 1..inputs as usize {
                let c = tables.iter().filter(|t| t[x] == t[y]).count();
                worst = worst.max(c);
            }
        }
        worst as f64 / self.seed_count() as f64
    }

    pub fn is_two_universal(&self) -> bool {
        self.max_collision_probability() <= (-(self.l as f64)).exp2() + 1e-15
    }
}
