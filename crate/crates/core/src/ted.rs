//! Ordered tree edit distance (Zhang–Shasha) with unit costs.

/// A tree flattened in postorder with the bookkeeping Zhang–Shasha needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostorderTree<L> {
    labels: Vec<L>,
    /// Postorder index of each node's leftmost leaf descendant.
    leftmost: Vec<usize>,
    /// Nodes that are the root or have a left sibling, ascending.
    keyroots: Vec<usize>,
}

impl<L> PostorderTree<L> {
    /// Flatten any tree given accessors for labels and children.
    pub fn build<T>(root: &T, label: impl Fn(&T) -> L, children: impl Fn(&T) -> &[T]) -> Self {
        let mut labels = Vec::new();
        let mut leftmost = Vec::new();
        let mut keyroot = Vec::new();
        // Explicit stack of (node, next child index, leftmost leaf so far).
        let mut stack: Vec<(&T, usize, Option<usize>)> = vec![(root, 0, None)];
        let mut is_first_child: Vec<bool> = vec![true];
        while let Some(top) = stack.last_mut() {
            let (node, next, _) = *top;
            let kids = children(node);
            if next < kids.len() {
                top.1 += 1;
                stack.push((&kids[next], 0, None));
                is_first_child.push(next == 0);
                continue;
            }
            let (node, _, lm) = stack.pop().expect("non-empty");
            let first = is_first_child.pop().expect("parallel stack");
            let idx = labels.len();
            let lm = lm.unwrap_or(idx);
            labels.push(label(node));
            leftmost.push(lm);
            keyroot.push(!first || stack.is_empty());
            if let Some(parent) = stack.last_mut() {
                if parent.2.is_none() {
                    parent.2 = Some(lm);
                }
            }
        }
        let keyroots = (0..labels.len()).filter(|&i| keyroot[i]).collect();
        PostorderTree {
            labels,
            leftmost,
            keyroots,
        }
    }

    /// Build from parallel postorder arrays. `leftmost[i]` must be the
    /// leftmost leaf of node i.
    pub fn from_postorder(labels: Vec<L>, leftmost: Vec<usize>) -> Self {
        assert_eq!(labels.len(), leftmost.len());
        let n = labels.len();
        // A node is a keyroot iff no later node shares its leftmost leaf.
        let mut seen = vec![false; n];
        let mut keyroots = Vec::new();
        for i in (0..n).rev() {
            if !seen[leftmost[i]] {
                seen[leftmost[i]] = true;
                keyroots.push(i);
            }
        }
        keyroots.reverse();
        PostorderTree {
            labels,
            leftmost,
            keyroots,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn leftmost(&self) -> &[usize] {
        &self.leftmost
    }
}

/// Reusable scratch buffers for repeated distance computations.
#[derive(Debug, Default, Clone)]
pub struct TedWorkspace {
    tree: Vec<u32>,
    forest: Vec<u32>,
}

impl TedWorkspace {
    pub fn new() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("tree edit distance over {left} x {right} nodes exceeds the limit of {limit} cells")]
pub struct ResourceError {
    pub left: usize,
    pub right: usize,
    pub limit: u64,
}

/// Default bound on the node-count product.
pub const DEFAULT_CELL_LIMIT: u64 = 100_000_000;

/// Unit-cost insert/delete/relabel distance.
pub fn zhang_shasha<L: PartialEq>(a: &PostorderTree<L>, b: &PostorderTree<L>, ws: &mut TedWorkspace) -> usize {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return n + m;
    }
    let w = m + 1;
    // Every cell is written before it is read, so stale values are harmless.
    if ws.tree.len() < n * m {
        ws.tree.resize(n * m, 0);
    }
    if ws.forest.len() < (n + 1) * w {
        ws.forest.resize((n + 1) * w, 0);
    }
    let (a_left, b_left) = (&a.leftmost[..], &b.leftmost[..]);
    for &i in &a.keyroots {
        let li = a_left[i];
        for &j in &b.keyroots {
            let lj = b_left[j];
            let cols = j + 1 - lj;
            let b_left = &b_left[lj..=j];
            let b_labels = &b.labels[lj..=j];
            // Row x of fd: forest a[li..li+x) against every prefix of b[lj..=j].
            let fd = &mut ws.forest[..];
            for (y, cell) in fd[..=cols].iter_mut().enumerate() {
                *cell = y as u32;
            }
            for x in li..=i {
                let xr = x - li + 1;
                let ax = a_left[x];
                let label = &a.labels[x];
                let (done, rest) = fd.split_at_mut(xr * w);
                let prev = &done[(xr - 1) * w..][..=cols];
                // Forests ending just before x's subtree.
                let before = &done[(ax - li) * w..][..=cols];
                let cur = &mut rest[..=cols];
                let tree_row = &mut ws.tree[x * m + lj..][..cols];
                cur[0] = xr as u32;
                for y in 0..cols {
                    let del = prev[y + 1] + 1;
                    let ins = cur[y] + 1;
                    let by = b_left[y] - lj;
                    let v = if ax == li && by == 0 {
                        let v = del.min(ins).min(prev[y] + u32::from(*label != b_labels[y]));
                        tree_row[y] = v;
                        v
                    } else {
                        del.min(ins).min(before[by] + tree_row[y])
                    };
                    cur[y + 1] = v;
                }
            }
        }
    }
    ws.tree[n * m - 1] as usize
}

/// Distance with the node-count product bounded by `limit`.
pub fn bounded_distance<L: PartialEq>(
    a: &PostorderTree<L>,
    b: &PostorderTree<L>,
    limit: u64,
) -> Result<usize, ResourceError> {
    if (a.len() as u64).saturating_mul(b.len() as u64) > limit {
        return Err(ResourceError {
            left: a.len(),
            right: b.len(),
            limit,
        });
    }
    Ok(zhang_shasha(a, b, &mut TedWorkspace::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug)]
    struct T(char, Vec<T>);

    fn t(s: &str) -> T {
        // "a(b c(d))"
        fn parse(chars: &[char], i: &mut usize) -> T {
            let label = chars[*i];
            *i += 1;
            let mut kids = Vec::new();
            if *i < chars.len() && chars[*i] == '(' {
                *i += 1;
                while chars[*i] != ')' {
                    if chars[*i] == ' ' {
                        *i += 1;
                        continue;
                    }
                    kids.push(parse(chars, i));
                }
                *i += 1;
            }
            T(label, kids)
        }
        let chars: Vec<char> = s.chars().collect();
        parse(&chars, &mut 0)
    }

    fn flat(s: &str) -> PostorderTree<char> {
        PostorderTree::build(&t(s), |n| n.0, |n| &n.1)
    }

    fn d(a: &str, b: &str) -> usize {
        zhang_shasha(&flat(a), &flat(b), &mut TedWorkspace::new())
    }

    #[test]
    fn postorder_bookkeeping() {
        let tr = flat("f(d(a c(b)) e)");
        assert_eq!(tr.labels(), &['a', 'b', 'c', 'd', 'e', 'f']);
        assert_eq!(tr.leftmost(), &[0, 1, 1, 0, 4, 0]);
        assert_eq!(tr.keyroots, vec![2, 4, 5]);
        let again = PostorderTree::from_postorder(tr.labels.clone(), tr.leftmost.clone());
        assert_eq!(again, tr);
    }

    #[test]
    fn classic_example() {
        // The standard Zhang–Shasha example pair has distance 2.
        assert_eq!(d("f(d(a c(b)) e)", "f(c(d(a b)) e)"), 2);
    }

    #[test]
    fn basic_distances() {
        assert_eq!(d("a", "a"), 0);
        assert_eq!(d("a", "b"), 1);
        assert_eq!(d("a(b c)", "a(b)"), 1);
        assert_eq!(d("a(b c)", "a(c b)"), 2);
        assert_eq!(d("a(b(c(d)))", "a"), 3);
        assert_eq!(d("a(b c d)", "x(y z)"), 4);
    }

    #[test]
    fn limit_is_enforced() {
        let a = flat("a(b c)");
        assert!(bounded_distance(&a, &a, 8).is_err());
        assert_eq!(bounded_distance(&a, &a, 9), Ok(0));
    }
}
