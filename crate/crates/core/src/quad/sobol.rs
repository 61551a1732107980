//! Four-dimensional Sobol sequence (Joe-Kuo direction numbers) with digital shifts.

const BITS: usize = 32;

/// `(s, a, m₁..m_s)` for dimensions 2 to 4.
const PRIMITIVES: [(usize, u32, [u32; 3]); 3] = [(1, 0, [1, 0, 0]), (2, 1, [1, 3, 0]), (3, 1, [1, 3, 1])];

#[derive(Debug, Clone)]
pub struct Sobol4 {
    directions: [[u32; BITS]; 4],
}

impl Default for Sobol4 {
    fn default() -> Self {
        Self::new()
    }
}

impl Sobol4 {
    pub fn new() -> Self {
        let mut directions = [[0u32; BITS]; 4];
        for (k, v) in directions[0].iter_mut().enumerate() {
            *v = 1 << (31 - k);
        }
        for (dim, &(s, a, m)) in PRIMITIVES.iter().enumerate() {
            let v = &mut directions[dim + 1];
            for k in 0..s {
                v[k] = m[k] << (31 - k);
            }
            for k in s..BITS {
                let mut x = v[k - s] ^ (v[k - s] >> s);
                for j in 1..s {
                    if (a >> (s - 1 - j)) & 1 == 1 {
                        x ^= v[k - j];
                    }
                }
                v[k] = x;
            }
        }
        Self { directions }
    }

    /// Point number `index` in Gray-code order, as raw 32-bit integers.
    pub fn point(&self, index: u32) -> [u32; 4] {
        let gray = index ^ (index >> 1);
        let mut out = [0u32; 4];
        for bit in 0..BITS {
            if (gray >> bit) & 1 == 1 {
                for (o, d) in out.iter_mut().zip(&self.directions) {
                    *o ^= d[bit];
                }
            }
        }
        out
    }

    /// Advances a point from `index − 1` to `index` (`index ≥ 1`).
    #[inline]
    pub fn advance(&self, state: &mut [u32; 4], index: u32) {
        let bit = index.trailing_zeros() as usize;
        for (o, d) in state.iter_mut().zip(&self.directions) {
            *o ^= d[bit];
        }
    }
}

/// Shifted point mapped to the open unit cube.
#[inline]
pub fn to_unit(raw: [u32; 4], shift: [u32; 4]) -> [f64; 4] {
    const SCALE: f64 = 1.0 / 4294967296.0;
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = ((raw[i] ^ shift[i]) as f64 + 0.5) * SCALE;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_points() {
        let s = Sobol4::new();
        assert_eq!(s.point(0), [0, 0, 0, 0]);
        assert_eq!(s.point(1), [1 << 31; 4]);
        let p2 = s.point(2);
        assert_eq!(p2[0], 3 << 30);
        assert_eq!(p2[1], 1 << 30);
    }

    #[test]
    fn incremental_matches_direct() {
        let s = Sobol4::new();
        let mut state = s.point(0);
        for i in 1..5000u32 {
            s.advance(&mut state, i);
            assert_eq!(state, s.point(i));
        }
    }

    #[test]
    fn every_dyadic_box_hit_once() {
        // The first two coordinates form a (0, m, 2)-net; each coordinate alone is
        // stratified.
        let s = Sobol4::new();
        let k = 6;
        let n = 1u32 << k;
        for d in 0..4 {
            let cells: std::collections::HashSet<u32> = (0..n).map(|i| s.point(i)[d] >> (32 - k)).collect();
            assert_eq!(cells.len(), n as usize);
        }
        for (d1, d2) in [(0usize, 1usize)] {
            for split in 0..=k {
                let mut seen = std::collections::HashSet::new();
                for i in 0..n {
                    let p = s.point(i);
                    let a = if split == 0 { 0 } else { p[d1] >> (32 - split) };
                    let b = if split == k { 0 } else { p[d2] >> (32 - (k - split)) };
                    assert!(seen.insert((a, b)), "dims {d1},{d2} split {split}");
                }
            }
        }
    }
}
