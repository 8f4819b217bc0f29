//! Constant-time lowest common ancestor queries via Euler tour + sparse table.

/// LCA structure over a rooted tree given by parent pointers.
#[derive(Debug, Clone)]
pub struct EulerLca {
    first: Vec<usize>,
    euler: Vec<usize>,
    depth: Vec<u32>,
    /// `table[j][i]` = index into `euler` of the shallowest entry in `[i, i + 2^j)`.
    table: Vec<Vec<u32>>,
}

impl EulerLca {
    /// `children[v]` lists the children of `v`; `root` is the tree root.
    pub fn new(children: &[Vec<usize>], root: usize) -> Self {
        let n = children.len();
        let mut first = vec![usize::MAX; n];
        let mut depth = vec![0u32; n];
        let mut euler = Vec::with_capacity(2 * n);
        // Iterative DFS: (node, next child index).
        let mut stack = vec![(root, 0usize)];
        first[root] = 0;
        euler.push(root);
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&c) = children[v].get(*next) {
                *next += 1;
                depth[c] = depth[v] + 1;
                first[c] = euler.len();
                euler.push(c);
                stack.push((c, 0));
            } else {
                stack.pop();
                if let Some(&(parent, _)) = stack.last() {
                    euler.push(parent);
                }
            }
        }
        let len = euler.len();
        let mut table = vec![(0..len as u32).collect::<Vec<_>>()];
        let mut span = 1;
        while 2 * span <= len {
            let prev = table.last().unwrap();
            let row = (0..=len - 2 * span)
                .map(|i| {
                    let (a, b) = (prev[i], prev[i + span]);
                    if depth[euler[a as usize]] <= depth[euler[b as usize]] {
                        a
                    } else {
                        b
                    }
                })
                .collect();
            table.push(row);
            span *= 2;
        }
        EulerLca { first, euler, depth, table }
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.depth[v]
    }

    pub fn lca(&self, u: usize, v: usize) -> usize {
        let (mut a, mut b) = (self.first[u], self.first[v]);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let len = b - a + 1;
        let j = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let row = &self.table[j];
        let (x, y) = (row[a], row[b + 1 - (1 << j)]);
        let pick = if self.depth[self.euler[x as usize]] <= self.depth[self.euler[y as usize]] { x } else { y };
        self.euler[pick as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn naive_lca(parent: &[Option<usize>], mut u: usize, mut v: usize) -> usize {
        let depth = |mut x: usize| {
            let mut d = 0;
            while let Some(p) = parent[x] {
                x = p;
                d += 1;
            }
            d
        };
        let (mut du, mut dv) = (depth(u), depth(v));
        while du > dv {
            u = parent[u].unwrap();
            du -= 1;
        }
        while dv > du {
            v = parent[v].unwrap();
            dv -= 1;
        }
        while u != v {
            u = parent[u].unwrap();
            v = parent[v].unwrap();
        }
        u
    }

    #[test]
    fn matches_naive_on_random_trees() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 10, 97, 400] {
            let mut parent = vec![None; n];
            let mut children = vec![Vec::new(); n];
            for (v, slot) in parent.iter_mut().enumerate().skip(1) {
                let p = rng.gen_range(0..v);
                *slot = Some(p);
                children[p].push(v);
            }
            let lca = EulerLca::new(&children, 0);
            for _ in 0..500 {
                let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
                assert_eq!(lca.lca(u, v), naive_lca(&parent, u, v));
            }
        }
    }

    #[test]
    fn deep_path() {
        let n = 5000;
        let children: Vec<Vec<usize>> = (0..n).map(|v| if v + 1 < n { vec![v + 1] } else { vec![] }).collect();
        let lca = EulerLca::new(&children, 0);
        assert_eq!(lca.lca(4999, 1234), 1234);
        assert_eq!(lca.depth(4999), 4999);
    }
}
