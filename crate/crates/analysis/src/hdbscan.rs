//! Density-based hierarchical clustering.
//!
//! The classic construction: core distances at k = `min_cluster_size`
//! (counting the point itself), mutual-reachability distances, a minimum
//! spanning tree by Prim's algorithm, a single-linkage merge tree, a
//! condensed tree that drops components smaller than `min_cluster_size`,
//! and cluster selection by excess-of-mass stability. Points that end up
//! in no selected cluster are labeled -1.

use num_traits::Float;

use crate::error::AnalysisError;

/// Cluster labels for `points`, in input order. Labels are contiguous from
/// 0; -1 is noise. Fewer than `min_cluster_size` points is not an error:
/// everything is noise.
pub fn hdbscan<T: Float>(
    points: &[Vec<T>],
    min_cluster_size: usize,
) -> Result<Vec<i32>, AnalysisError> {
    let n = points.len();
    let min_cluster_size = min_cluster_size.max(2);
    validate_points(points)?;
    if n < min_cluster_size || n < 2 {
        return Ok(vec![-1; n]);
    }

    let core = core_distances(points, min_cluster_size);
    let mst = prim_mst(points, &core);
    let slt = single_linkage_tree(&mst, n);
    let condensed = condense_tree(&slt, n, min_cluster_size);
    let selected = select_clusters(&condensed, n);
    Ok(label_points(&condensed, &selected, n))
}

fn validate_points<T: Float>(points: &[Vec<T>]) -> Result<(), AnalysisError> {
    let Some(first) = points.first() else { return Ok(()) };
    let dim = first.len();
    for (index, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(AnalysisError::PointDimensionMismatch {
                index,
                expected: dim,
                got: p.len(),
            });
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(AnalysisError::NonFinitePoint { index });
        }
    }
    Ok(())
}

fn euclidean<T: Float>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

/// Distance to the k-th nearest neighbor, counting the point itself as the
/// first.
fn core_distances<T: Float>(points: &[Vec<T>], k: usize) -> Vec<T> {
    points
        .iter()
        .map(|p| {
            let mut dists: Vec<T> = points.iter().map(|q| euclidean(p, q)).collect();
            dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
            dists[k - 1]
        })
        .collect()
}

struct MstEdge<T> {
    left: usize,
    right: usize,
    distance: T,
}

fn mutual_reachability<T: Float>(points: &[Vec<T>], core: &[T], a: usize, b: usize) -> T {
    core[a].max(core[b]).max(euclidean(&points[a], &points[b]))
}

fn prim_mst<T: Float>(points: &[Vec<T>], core: &[T]) -> Vec<MstEdge<T>> {
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![T::infinity(); n];
    let mut best_from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0usize;

    for _ in 1..n {
        in_tree[current] = true;
        let mut next = usize::MAX;
        let mut next_dist = T::infinity();
        for i in 0..n {
            if in_tree[i] {
                continue;
            }
            let mrd = mutual_reachability(points, core, current, i);
            if mrd < best[i] {
                best[i] = mrd;
                best_from[i] = current;
            }
            if best[i] < next_dist {
                next_dist = best[i];
                next = i;
            }
        }
        edges.push(MstEdge { left: best_from[next], right: next, distance: next_dist });
        current = next;
    }
    edges.sort_by(|a, b| a.distance.partial_cmp(&b.distance).expect("finite distances"));
    edges
}

struct SltNode<T> {
    left_child: usize,
    right_child: usize,
    distance: T,
    size: usize,
}

/// Union-find that assigns each merge a fresh label n, n+1, ... so the
/// merge tree can address components by label.
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    next_label: usize,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..2 * n - 1).collect(),
            size: vec![1; 2 * n - 1],
            next_label: n,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> usize {
        let label = self.next_label;
        self.next_label += 1;
        self.parent[a] = label;
        self.parent[b] = label;
        self.size[label] = self.size[a] + self.size[b];
        label
    }
}

fn single_linkage_tree<T: Float>(edges: &[MstEdge<T>], n: usize) -> Vec<SltNode<T>> {
    let mut uf = UnionFind::new(n);
    let mut tree = Vec::with_capacity(n - 1);
    for edge in edges {
        let left = uf.find(edge.left);
        let right = uf.find(edge.right);
        let size = uf.size[left] + uf.size[right];
        tree.push(SltNode { left_child: left, right_child: right, distance: edge.distance, size });
        uf.union(left, right);
    }
    tree
}

/// One row of the condensed tree. `id < n` rows are individual points;
/// larger ids are clusters.
struct CondensedRow<T> {
    id: usize,
    parent: usize,
    lambda_birth: T,
    size: usize,
}

struct CondensedTree<T> {
    rows: Vec<CondensedRow<T>>,
    /// Cluster ids run from n (the root) to next_cluster_id (exclusive).
    next_cluster_id: usize,
}

fn condense_tree<T: Float>(slt: &[SltNode<T>], n: usize, min_cluster_size: usize) -> CondensedTree<T> {
    let top = 2 * (n - 1);
    let mut relabel = vec![usize::MAX; top + 1];
    relabel[top] = n;
    let mut next_cluster_id = n + 1;
    let mut rows = Vec::new();
    let mut ignore = vec![false; top + 1];

    // Walk internal nodes top-down.
    let mut queue = std::collections::VecDeque::from([top]);
    let mut order = Vec::new();
    while let Some(id) = queue.pop_front() {
        order.push(id);
        if id >= n {
            let node = &slt[id - n];
            queue.push_back(node.left_child);
            queue.push_back(node.right_child);
        }
    }

    for id in order {
        if id < n || ignore[id] {
            continue;
        }
        let node = &slt[id - n];
        let lambda = if node.distance > T::zero() {
            T::one() / node.distance
        } else {
            T::infinity()
        };
        let child_size = |child: usize| if child < n { 1 } else { slt[child - n].size };
        let left_size = child_size(node.left_child);
        let right_size = child_size(node.right_child);
        let left_big = left_size >= min_cluster_size;
        let right_big = right_size >= min_cluster_size;

        match (left_big, right_big) {
            (true, true) => {
                // A true split: both sides become new clusters.
                for (child, size) in [(node.left_child, left_size), (node.right_child, right_size)] {
                    relabel[child] = next_cluster_id;
                    next_cluster_id += 1;
                    rows.push(CondensedRow {
                        id: relabel[child],
                        parent: relabel[id],
                        lambda_birth: lambda,
                        size,
                    });
                }
            }
            (true, false) => {
                relabel[node.left_child] = relabel[id];
                spill_points(slt, n, node.right_child, relabel[id], lambda, &mut rows, &mut ignore);
            }
            (false, true) => {
                relabel[node.right_child] = relabel[id];
                spill_points(slt, n, node.left_child, relabel[id], lambda, &mut rows, &mut ignore);
            }
            (false, false) => {
                // The cluster dissolves; all points fall out here.
                spill_points(slt, n, node.left_child, relabel[id], lambda, &mut rows, &mut ignore);
                spill_points(slt, n, node.right_child, relabel[id], lambda, &mut rows, &mut ignore);
            }
        }
    }

    CondensedTree { rows, next_cluster_id }
}

/// Record every leaf under `root` as a point row of `parent` falling out
/// at `lambda`, and mark visited internal nodes so the walk skips them.
fn spill_points<T: Float>(
    slt: &[SltNode<T>],
    n: usize,
    root: usize,
    parent: usize,
    lambda: T,
    rows: &mut Vec<CondensedRow<T>>,
    ignore: &mut [bool],
) {
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(id) = queue.pop_front() {
        if id < n {
            rows.push(CondensedRow { id, parent, lambda_birth: lambda, size: 1 });
        } else {
            ignore[id] = true;
            let node = &slt[id - n];
            queue.push_back(node.left_child);
            queue.push_back(node.right_child);
        }
    }
}

/// Excess-of-mass cluster selection. The root cluster (id n) is never a
/// candidate, so a data set that never splits comes back all noise.
fn select_clusters<T: Float>(tree: &CondensedTree<T>, n: usize) -> Vec<usize> {
    let candidates: Vec<usize> = (n + 1..tree.next_cluster_id).collect();
    if candidates.is_empty() {
        return Vec::new();
    }

    let lambda_birth_of = |cluster: usize| -> T {
        tree.rows
            .iter()
            .find(|row| row.id == cluster)
            .map(|row| row.lambda_birth)
            .unwrap_or(T::zero())
    };
    // Cluster rows are born at true splits between distinct locations, so
    // their birth lambda is always finite; only point rows can fall out at
    // infinite lambda (duplicate coordinates), which legitimately gives
    // their cluster infinite stability.
    let stability_of = |cluster: usize| -> T {
        let birth = if cluster == n { T::zero() } else { lambda_birth_of(cluster) };
        tree.rows
            .iter()
            .filter(|row| row.parent == cluster)
            .fold(T::zero(), |acc, row| {
                acc + (row.lambda_birth - birth) * T::from(row.size).expect("size fits scalar")
            })
    };

    let mut stability: std::collections::BTreeMap<usize, T> =
        candidates.iter().map(|&c| (c, stability_of(c))).collect();
    let mut selected: std::collections::BTreeMap<usize, bool> =
        candidates.iter().map(|&c| (c, false)).collect();

    for &cluster in candidates.iter().rev() {
        let child_clusters: Vec<usize> = tree
            .rows
            .iter()
            .filter(|row| row.parent == cluster && row.id >= n)
            .map(|row| row.id)
            .collect();
        let combined: T = child_clusters
            .iter()
            .map(|c| *stability.get(c).expect("child stability"))
            .fold(T::zero(), |a, b| a + b);
        let own = *stability.get(&cluster).expect("own stability");
        if own > combined {
            selected.insert(cluster, true);
            for descendant in descendants(tree, cluster, n) {
                selected.insert(descendant, false);
            }
        } else {
            stability.insert(cluster, combined);
        }
    }

    selected.into_iter().filter(|(_, keep)| *keep).map(|(id, _)| id).collect()
}

fn descendants<T: Float>(tree: &CondensedTree<T>, cluster: usize, n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut queue = std::collections::VecDeque::from([cluster]);
    while let Some(id) = queue.pop_front() {
        for row in tree.rows.iter().filter(|row| row.parent == id && row.id >= n) {
            out.push(row.id);
            queue.push_back(row.id);
        }
    }
    out
}

fn label_points<T: Float>(tree: &CondensedTree<T>, selected: &[usize], n: usize) -> Vec<i32> {
    let mut labels = vec![-1i32; n];
    // `selected` is ascending (BTreeMap order), so label ids are stable
    // for a given input order.
    for (label, &cluster) in selected.iter().enumerate() {
        let mut queue = std::collections::VecDeque::from([cluster]);
        while let Some(id) = queue.pop_front() {
            for row in tree.rows.iter().filter(|row| row.parent == id) {
                if row.id < n {
                    labels[row.id] = label as i32;
                } else {
                    queue.push_back(row.id);
                }
            }
        }
    }
    labels
}
