//! All-pairs shortest paths over the neighborhood graph.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::knn::NeighborGraph;

/// Dense `n × n` matrix of graph shortest-path lengths with cached means.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicMatrix {
    n: usize,
    dist: Vec<f64>,
    row_means: Vec<f64>,
    grand_mean: f64,
}

impl GeodesicMatrix {
    /// Wraps a precomputed symmetric distance matrix (row-major).
    pub fn from_dense(n: usize, dist: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("geodesic matrix must be non-empty"));
        }
        if dist.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: dist.len() });
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(Error::invalid(format!("non-zero diagonal at {i}")));
            }
            for j in 0..i {
                let (a, b) = (dist[i * n + j], dist[j * n + i]);
                if !(a.is_finite() && a >= 0.0) || a != b {
                    return Err(Error::invalid(format!(
                        "entry ({i}, {j}) must be finite, non-negative and symmetric"
                    )));
                }
            }
        }
        let row_means: Vec<f64> =
            dist.chunks_exact(n).map(|r| r.iter().sum::<f64>() / n as f64).collect();
        let grand_mean = row_means.iter().sum::<f64>() / n as f64;
        Ok(Self { n, dist, row_means, grand_mean })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.dist
    }

    pub fn row_means(&self) -> &[f64] {
        &self.row_means
    }

    pub fn grand_mean(&self) -> f64 {
        self.grand_mean
    }

    /// Principal submatrix on `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let m = indices.len();
        let mut dist = Vec::with_capacity(m * m);
        for &i in indices {
            let row = self.row(i);
            dist.extend(indices.iter().map(|&j| row[j]));
        }
        Self::from_dense(m, dist)
    }

    pub const CACHE_MAGIC: &'static [u8; 8] = b"GEODMAT1";

    /// Binary cache: 8-byte magic, `n` as u64, then row-major f64, all
    /// little-endian.
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(Self::CACHE_MAGIC)?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.n * 8);
        for row in self.dist.chunks_exact(self.n) {
            buf.clear();
            for v in row {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_cache<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != Self::CACHE_MAGIC {
            return Err(Error::invalid("not a geodesic matrix cache (bad magic)"));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let n = usize::try_from(u64::from_le_bytes(word))
            .ok()
            .filter(|n| n.checked_mul(*n).is_some())
            .ok_or_else(|| Error::invalid("geodesic cache dimension overflows"))?;
        let mut dist = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            r.read_exact(&mut word)?;
            dist.push(f64::from_le_bytes(word));
        }
        Self::from_dense(n, dist)
    }
}

/// Connected components, each sorted ascending, ordered by smallest member.
pub fn connected_components(g: &NeighborGraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut label = vec![usize::MAX; n];
    let mut comps = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![start];
        label[start] = id;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in g.neighbors(u) {
                if label[v] == usize::MAX {
                    label[v] = id;
                    members.push(v);
                    queue.push_back(v);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps
}

/// Nodes of the largest connected component; ties go to the component with
/// the smallest minimum index.
pub fn largest_component(g: &NeighborGraph) -> Vec<usize> {
    connected_components(g)
        .into_iter()
        .fold(Vec::new(), |best, c| if c.len() > best.len() { c } else { best })
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap.
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Compressed adjacency for cache-friendly traversal.
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl Csr {
    fn new(g: &NeighborGraph) -> Self {
        let mut offsets = Vec::with_capacity(g.n() + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for i in 0..g.n() {
            for &(j, w) in g.neighbors(i) {
                targets.push(j as u32);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        Self { offsets, targets, weights }
    }

    fn dijkstra(&self, source: usize, out: &mut [f64], heap: &mut BinaryHeap<Entry>) {
        out.fill(f64::INFINITY);
        out[source] = 0.0;
        heap.clear();
        heap.push(Entry { dist: 0.0, node: source as u32 });
        while let Some(Entry { dist, node }) = heap.pop() {
            let u = node as usize;
            if dist > out[u] {
                continue;
            }
            for e in self.offsets[u]..self.offsets[u + 1] {
                let v = self.targets[e] as usize;
                let nd = dist + self.weights[e];
                if nd < out[v] {
                    out[v] = nd;
                    heap.push(Entry { dist: nd, node: v as u32 });
                }
            }
        }
    }
}

/// Shortest-path lengths from `source` to every node (infinite when
/// unreachable).
pub fn single_source(g: &NeighborGraph, source: usize) -> Vec<f64> {
    let mut out = vec![0.0; g.n()];
    Csr::new(g).dijkstra(source, &mut out, &mut BinaryHeap::new());
    out
}

/// All-pairs shortest paths by one Dijkstra run per source node.
///
/// A disconnected graph is an error carrying the component partition; see
/// [`largest_component`] for restricting to the main component.
pub fn geodesic_matrix(g: &NeighborGraph) -> Result<GeodesicMatrix> {
    let n = g.n();
    if n == 0 {
        return Err(Error::invalid("empty graph"));
    }
    let comps = connected_components(g);
    if comps.len() > 1 {
        return Err(Error::Disconnected { components: comps });
    }
    let csr = Csr::new(g);
    let mut dist = vec![0.0; n * n];
    dist.par_chunks_mut(n).enumerate().for_each_init(BinaryHeap::new, |heap, (i, row)| {
        csr.dijkstra(i, row, heap);
    });
    // Path sums accumulate in a different order from each end; keep the
    // smaller so the matrix is exactly symmetric.
    for i in 0..n {
        for j in 0..i {
            let m = dist[i * n + j].min(dist[j * n + i]);
            dist[i * n + j] = m;
            dist[j * n + i] = m;
        }
    }
    GeodesicMatrix::from_dense(n, dist)
}
