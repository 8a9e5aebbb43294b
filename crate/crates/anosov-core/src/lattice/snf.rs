//! Smith and Hermite normal forms over the integers with transform
//! tracking, plus lattice kernels and saturation.

use alloc::vec;
use alloc::vec::Vec;

/// Row-major integer matrix, possibly rectangular.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMat {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<i128>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            a: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i128>]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut a = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            a.extend_from_slice(row);
        }
        IntMat { rows: r, cols: c, a }
    }

    pub fn from_cols(cols: &[Vec<i128>]) -> Self {
        let c = cols.len();
        let r = cols[0].len();
        let mut m = IntMat::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for i in 0..r {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    pub fn col(&self, j: usize) -> Vec<i128> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn matmul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows);
        let mut out = IntMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[i128]) -> Vec<i128> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn transpose(&self) -> IntMat {
        let mut out = IntMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn sub(&self, other: &IntMat) -> IntMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.a.iter_mut().zip(other.a.iter()) {
            *x -= *y;
        }
        out
    }

    pub fn pow(&self, p: u32) -> IntMat {
        assert_eq!(self.rows, self.cols);
        let mut out = IntMat::identity(self.rows);
        for _ in 0..p {
            out = out.matmul(self);
        }
        out
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> i128 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return 1;
        }
        let mut a = self.a.clone();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..(n - 1) {
            if a[k * n + k] == 0 {
                let mut swap = None;
                for i in (k + 1)..n {
                    if a[i * n + k] != 0 {
                        swap = Some(i);
                        break;
                    }
                }
                match swap {
                    Some(i) => {
                        for j in 0..n {
                            a.swap(k * n + j, i * n + j);
                        }
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in (k + 1)..n {
                for j in (k + 1)..n {
                    let num = a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j];
                    a[i * n + j] = num / prev;
                }
                a[i * n + k] = 0;
            }
            prev = a[k * n + k];
        }
        sign * a[(n - 1) * n + (n - 1)]
    }
}

impl core::ops::Index<(usize, usize)> for IntMat {
    type Output = i128;
    fn index(&self, (i, j): (usize, usize)) -> &i128 {
        &self.a[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for IntMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i128 {
        &mut self.a[i * self.cols + j]
    }
}

/// Smith normal form `S = U A V` with `U`, `V` unimodular.
///
/// `u_inv` is maintained alongside so lattice saturations do not need a
/// separate inversion.
#[derive(Debug, Clone)]
pub struct Smith {
    pub s: IntMat,
    pub u: IntMat,
    pub u_inv: IntMat,
    pub v: IntMat,
    pub v_inv: IntMat,
}

impl Smith {
    pub fn diag(&self) -> Vec<i128> {
        let n = self.s.rows.min(self.s.cols);
        (0..n).map(|i| self.s[(i, i)]).collect()
    }

    pub fn rank(&self) -> usize {
        self.diag().iter().filter(|&&d| d != 0).count()
    }
}

struct SmithCalc {
    s: IntMat,
    u: IntMat,
    u_inv: IntMat,
    v: IntMat,
    v_inv: IntMat,
}

impl SmithCalc {
    fn swap_rows(&mut self, i: usize, j: usize) {
        for c in 0..self.s.cols {
            self.s.a.swap(i * self.s.cols + c, j * self.s.cols + c);
        }
        for c in 0..self.u.cols {
            self.u.a.swap(i * self.u.cols + c, j * self.u.cols + c);
        }
        for r in 0..self.u_inv.rows {
            self.u_inv.a.swap(r * self.u_inv.cols + i, r * self.u_inv.cols + j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for r in 0..self.s.rows {
            self.s.a.swap(r * self.s.cols + i, r * self.s.cols + j);
        }
        for r in 0..self.v.rows {
            self.v.a.swap(r * self.v.cols + i, r * self.v.cols + j);
        }
        for c in 0..self.v_inv.cols {
            self.v_inv.a.swap(i * self.v_inv.cols + c, j * self.v_inv.cols + c);
        }
    }

    /// row_i += k * row_j
    fn add_row(&mut self, i: usize, j: usize, k: i128) {
        for c in 0..self.s.cols {
            let t = k * self.s[(j, c)];
            self.s[(i, c)] += t;
        }
        for c in 0..self.u.cols {
            let t = k * self.u[(j, c)];
            self.u[(i, c)] += t;
        }
        // u_inv: col_j -= k * col_i
        for r in 0..self.u_inv.rows {
            let t = k * self.u_inv[(r, i)];
            self.u_inv[(r, j)] -= t;
        }
    }

    /// col_i += k * col_j
    fn add_col(&mut self, i: usize, j: usize, k: i128) {
        for r in 0..self.s.rows {
            let t = k * self.s[(r, j)];
            self.s[(r, i)] += t;
        }
        for r in 0..self.v.rows {
            let t = k * self.v[(r, j)];
            self.v[(r, i)] += t;
        }
        // v_inv: row_j -= k * row_i
        for c in 0..self.v_inv.cols {
            let t = k * self.v_inv[(i, c)];
            self.v_inv[(j, c)] -= t;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.s.cols {
            self.s[(i, c)] = -self.s[(i, c)];
        }
        for c in 0..self.u.cols {
            self.u[(i, c)] = -self.u[(i, c)];
        }
        for r in 0..self.u_inv.rows {
            self.u_inv[(r, i)] = -self.u_inv[(r, i)];
        }
    }
}

pub fn smith_normal_form(a: &IntMat) -> Smith {
    let (m, n) = (a.rows, a.cols);
    let mut c = SmithCalc {
        s: a.clone(),
        u: IntMat::identity(m),
        u_inv: IntMat::identity(m),
        v: IntMat::identity(n),
        v_inv: IntMat::identity(n),
    };
    let dim = m.min(n);
    for t in 0..dim {
        loop {
            // smallest nonzero pivot in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let v = c.s[(i, j)];
                    if v != 0 {
                        let better = match best {
                            None => true,
                            Some((bi, bj)) => v.abs() < c.s[(bi, bj)].abs(),
                        };
                        if better {
                            best = Some((i, j));
                        }
                    }
                }
            }
            let (pi, pj) = match best {
                Some(p) => p,
                None => break, // trailing block zero
            };
            if pi != t {
                c.swap_rows(t, pi);
            }
            if pj != t {
                c.swap_cols(t, pj);
            }
            let p = c.s[(t, t)];
            let mut dirty = false;
            for i in (t + 1)..m {
                let q = div_round(c.s[(i, t)], p);
                if q != 0 {
                    c.add_row(i, t, -q);
                }
                if c.s[(i, t)] != 0 {
                    dirty = true;
                }
            }
            for j in (t + 1)..n {
                let q = div_round(c.s[(t, j)], p);
                if q != 0 {
                    c.add_col(j, t, -q);
                }
                if c.s[(t, j)] != 0 {
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
        }
    }
    // divisibility chain s_t | s_{t+1}
    let mut t = 0;
    while t + 1 < dim {
        let st = c.s[(t, t)];
        let next = c.s[(t + 1, t + 1)];
        if st != 0 && next % st != 0 {
            // fold s_{t+1} into position t and redo
            c.add_row(t, t + 1, 1);
            clear_position(&mut c, t, m, n);
            t = 0;
            continue;
        }
        t += 1;
    }
    for i in 0..dim {
        if c.s[(i, i)] < 0 {
            c.negate_row(i);
        }
    }
    Smith {
        s: c.s,
        u: c.u,
        u_inv: c.u_inv,
        v: c.v,
        v_inv: c.v_inv,
    }
}

fn clear_position(c: &mut SmithCalc, t: usize, m: usize, n: usize) {
    loop {
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                let v = c.s[(i, j)];
                if v != 0 {
                    let better = match best {
                        None => true,
                        Some((bi, bj)) => v.abs() < c.s[(bi, bj)].abs(),
                    };
                    if better {
                        best = Some((i, j));
                    }
                }
            }
        }
        let (pi, pj) = match best {
            Some(p) => p,
            None => break,
        };
        if pi != t {
            c.swap_rows(t, pi);
        }
        if pj != t {
            c.swap_cols(t, pj);
        }
        let p = c.s[(t, t)];
        let mut dirty = false;
        for i in (t + 1)..m {
            let q = div_round(c.s[(i, t)], p);
            if q != 0 {
                c.add_row(i, t, -q);
            }
            if c.s[(i, t)] != 0 {
                dirty = true;
            }
        }
        for j in (t + 1)..n {
            let q = div_round(c.s[(t, j)], p);
            if q != 0 {
                c.add_col(j, t, -q);
            }
            if c.s[(t, j)] != 0 {
                dirty = true;
            }
        }
        if !dirty {
            break;
        }
    }
}

fn div_round(a: i128, b: i128) -> i128 {
    // round-to-nearest quotient keeps entries small during reduction
    let q = a / b;
    let r = a - q * b;
    if 2 * r.abs() > b.abs() {
        q + r.signum() * b.signum()
    } else {
        q
    }
}

/// Integer kernel basis of `A` (as a map Z^cols -> Z^rows). The returned
/// vectors form a basis of the full (saturated) kernel lattice.
pub fn kernel_basis(a: &IntMat) -> Vec<Vec<i128>> {
    let smith = smith_normal_form(a);
    let dim = a.rows.min(a.cols);
    let mut out = Vec::new();
    for j in 0..a.cols {
        let zero = j >= dim || smith.s[(j, j)] == 0;
        if zero {
            out.push(smith.v.col(j));
        }
    }
    out
}

/// Saturation of the column span of `g` inside Z^rows: a basis of
/// `span_Q(g) ∩ Z^rows`.
pub fn saturate_columns(g: &IntMat) -> Vec<Vec<i128>> {
    let smith = smith_normal_form(g);
    let r = smith.rank();
    (0..r).map(|j| smith.u_inv.col(j)).collect()
}

/// Row-style Hermite normal form (unique): row echelon, positive pivots,
/// entries above each pivot reduced into `[0, pivot)`.
pub fn hnf_rows(a: &IntMat) -> IntMat {
    let (m, n) = (a.rows, a.cols);
    let mut h = a.clone();
    let mut row = 0;
    for col in 0..n {
        if row >= m {
            break;
        }
        // gcd-reduce column below `row`
        loop {
            let mut piv: Option<usize> = None;
            for i in row..m {
                if h[(i, col)] != 0 {
                    piv = match piv {
                        None => Some(i),
                        Some(p) => {
                            if h[(i, col)].abs() < h[(p, col)].abs() {
                                Some(i)
                            } else {
                                Some(p)
                            }
                        }
                    };
                }
            }
            let p = match piv {
                Some(p) => p,
                None => break,
            };
            if p != row {
                for j in 0..n {
                    h.a.swap(row * n + j, p * n + j);
                }
            }
            let pv = h[(row, col)];
            let mut done = true;
            for i in (row + 1)..m {
                let q = div_round(h[(i, col)], pv);
                if q != 0 {
                    for j in 0..n {
                        let t = q * h[(row, j)];
                        h[(i, j)] -= t;
                    }
                }
                if h[(i, col)] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(row, col)] == 0 {
            continue;
        }
        if h[(row, col)] < 0 {
            for j in 0..n {
                h[(row, j)] = -h[(row, j)];
            }
        }
        let pv = h[(row, col)];
        for i in 0..row {
            let q = h[(i, col)].div_euclid(pv);
            if q != 0 {
                for j in 0..n {
                    let t = q * h[(row, j)];
                    h[(i, j)] -= t;
                }
            }
        }
        row += 1;
    }
    h
}

/// Column-style HNF: the unique normalized basis (as columns) of the
/// lattice spanned by the columns of `a`.
pub fn hnf_cols(a: &IntMat) -> IntMat {
    hnf_rows(&a.transpose()).transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_snf(a: &IntMat) {
        let s = smith_normal_form(a);
        assert_eq!(s.u.matmul(a).matmul(&s.v), s.s);
        assert_eq!(s.u.matmul(&s.u_inv), IntMat::identity(a.rows));
        assert_eq!(s.v.matmul(&s.v_inv), IntMat::identity(a.cols));
        assert_eq!(s.u.det().abs(), 1);
        assert_eq!(s.v.det().abs(), 1);
        // diagonal, nonnegative, divisibility chain
        let d = s.diag();
        for i in 0..a.rows {
            for j in 0..a.cols {
                if i != j {
                    assert_eq!(s.s[(i, j)], 0);
                }
            }
        }
        for w in d.windows(2) {
            assert!(w[0] >= 0);
            if w[0] != 0 {
                assert_eq!(w[1] % w[0], 0);
            } else {
                assert_eq!(w[1], 0);
            }
        }
    }

    #[test]
    fn snf_small_cases() {
        check_snf(&IntMat::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]));
        check_snf(&IntMat::from_rows(&[vec![1, 0], vec![0, 1]]));
        check_snf(&IntMat::from_rows(&[vec![0, 0], vec![0, 0]]));
        check_snf(&IntMat::from_rows(&[vec![6, 4], vec![2, 8]]));
        check_snf(&IntMat::from_rows(&[vec![2, 1, 0], vec![1, 1, 3]]));
    }

    #[test]
    fn snf_classic_diagonal() {
        let a = IntMat::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.diag(), vec![2, 2, 156]);
    }

    #[test]
    fn kernel_of_singular() {
        let a = IntMat::from_rows(&[vec![1, 2, 3], vec![2, 4, 6], vec![1, 1, 1]]);
        let k = kernel_basis(&a);
        assert_eq!(k.len(), 1);
        assert_eq!(a.matvec(&k[0]), vec![0, 0, 0]);
        // primitive: gcd of entries is 1
        let g = k[0].iter().fold(0i128, |g, &x| num_integer::gcd(g, x.abs()));
        assert_eq!(g, 1);
    }

    #[test]
    fn saturation_doubles_back() {
        // columns span an index-2 sublattice of a rank-2 primitive lattice
        let g = IntMat::from_cols(&[vec![2, 0, 0], vec![0, 2, 0]]);
        let sat = saturate_columns(&g);
        assert_eq!(sat.len(), 2);
        let b = IntMat::from_cols(&sat);
        // saturated basis spans all integer points of the xy-plane
        let s = smith_normal_form(&b);
        assert_eq!(s.diag(), vec![1, 1]);
    }

    #[test]
    fn hnf_unique_for_same_lattice() {
        let a = IntMat::from_cols(&[vec![2, 1], vec![0, 3]]);
        let b = IntMat::from_cols(&[vec![2, 4], vec![2, 1]]);
        // same lattice: b = a * unimodular
        assert_eq!(hnf_cols(&a), hnf_cols(&b));
    }

    #[test]
    fn bareiss_det() {
        let a = IntMat::from_rows(&[vec![2, 1], vec![1, 1]]);
        assert_eq!(a.det(), 1);
        let b = IntMat::from_rows(&[vec![3, 1], vec![2, 1]]);
        assert_eq!(b.det(), 1);
        let c = IntMat::from_rows(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]);
        assert_eq!(c.det(), -3);
    }
}
