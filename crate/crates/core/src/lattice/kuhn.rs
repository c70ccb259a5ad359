/// How each lattice cube is split into simplices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Split {
    /// `d!` simplices `{t_s(1) >= ... >= t_s(d)}`, one per permutation `s`.
    #[default]
    Kuhn,
    /// Planar only: `{t1 + t2 <= 1}` and its complement.
    AntiDiagonal,
}

/// Simplex decomposition of the unit cube `[0, 1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct KuhnMesh {
    pub dim: usize,
    pub split: Split,
    /// Vertex lists in `{0, 1}^d`; for the Kuhn split the chain
    /// `0, e_s(1), e_s(1) + e_s(2), ...`.
    pub simplices: Vec<Vec<[u8; 3]>>,
}

impl KuhnMesh {
    pub fn new(dim: usize, split: Split) -> Self {
        let simplices = match split {
            Split::Kuhn => permutations(dim)
                .into_iter()
                .map(|perm| {
                    let mut v = [0u8; 3];
                    let mut chain = vec![v];
                    for &a in &perm {
                        v[a] = 1;
                        chain.push(v);
                    }
                    chain
                })
                .collect(),
            Split::AntiDiagonal => {
                assert_eq!(dim, 2, "anti-diagonal split is planar");
                vec![
                    vec![[0, 0, 0], [1, 0, 0], [0, 1, 0]],
                    vec![[1, 1, 0], [0, 1, 0], [1, 0, 0]],
                ]
            }
        };
        KuhnMesh { dim, split, simplices }
    }

    /// Simplex containing the local point `t` in `[0, 1]^d` and its barycentric
    /// weights, one per vertex of that simplex.
    pub fn locate(&self, t: &[f64]) -> (usize, Vec<f64>) {
        match self.split {
            Split::Kuhn => {
                let mut order: Vec<usize> = (0..self.dim).collect();
                // Stable sort: ties go to the lower axis first.
                order.sort_by(|&a, &b| t[b].total_cmp(&t[a]));
                let id = permutation_index(&order);
                let mut w = Vec::with_capacity(self.dim + 1);
                w.push(1.0 - t[order[0]]);
                for j in 1..self.dim {
                    w.push(t[order[j - 1]] - t[order[j]]);
                }
                w.push(t[order[self.dim - 1]]);
                (id, w)
            }
            Split::AntiDiagonal => {
                if t[0] + t[1] <= 1.0 {
                    (0, vec![1.0 - t[0] - t[1], t[0], t[1]])
                } else {
                    (1, vec![t[0] + t[1] - 1.0, 1.0 - t[0], 1.0 - t[1]])
                }
            }
        }
    }
}

/// All permutations of `0..d` in lexicographic order.
pub(crate) fn permutations(d: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, left: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..left.len() {
            let a = left.remove(i);
            prefix.push(a);
            rec(prefix, left, out);
            prefix.pop();
            left.insert(i, a);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..d).collect(), &mut out);
    out
}

fn permutation_index(p: &[usize]) -> usize {
    // Lehmer code in the factorial number system.
    let n = p.len();
    let mut idx = 0;
    for i in 0..n {
        let smaller = p[i + 1..].iter().filter(|&&x| x < p[i]).count();
        idx = idx * (n - i) + smaller;
    }
    idx
}
