//! Picks representative conversation excerpts for a flagged question.
//!
//! Breaching segments are embedded as mean word vectors, clustered with
//! seeded k-means (cluster count chosen by the elbow rule) and one member
//! of each of the largest clusters is shown.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::metrics::Metric;
use crate::profile::{Flag, ScoredSegment, ThresholdSet};
use crate::resources::EmbeddingTable;
use crate::text::tokenize;
use crate::transcript::Message;

const RESTARTS: usize = 10;
const MAX_ITERATIONS: usize = 100;
const MAX_K: usize = 10;
const EPS: f64 = 1e-12;

/// Identifies one segment in the corpus.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SegmentRef {
    pub session_id: String,
    pub question_id: u32,
}

impl SegmentRef {
    pub fn of(seg: &ScoredSegment) -> Self {
        Self {
            session_id: seg.session_id.clone(),
            question_id: seg.segment.question_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentEmbedding {
    pub segment: SegmentRef,
    pub vector: Vec<f64>,
}

/// One shown cluster: its share of the breaching segments and the
/// transcript of its randomly chosen member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceCluster {
    pub coverage_frac: f64,
    pub size: usize,
    pub representative: SegmentRef,
    pub transcript: Vec<Message>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvidenceBundle {
    /// Largest clusters first.
    pub clusters: Vec<EvidenceCluster>,
    /// Breaching segments that were not chosen as representatives.
    pub omitted_segment_refs: Vec<SegmentRef>,
}

impl EvidenceBundle {
    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

/// Mean word vector over every token of the segment found in the table,
/// or the zero vector when none is.
pub fn embed_segment(seg: &ScoredSegment, emb: &EmbeddingTable) -> SegmentEmbedding {
    let mut sum = vec![0.0; emb.dimension()];
    let mut found = 0usize;
    for msg in &seg.segment.messages {
        for token in tokenize(&msg.text) {
            if let Some(v) = emb.get(&token) {
                sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
                found += 1;
            }
        }
    }
    if found > 0 {
        sum.iter_mut().for_each(|s| *s /= found as f64);
    }
    SegmentEmbedding {
        segment: SegmentRef::of(seg),
        vector: sum,
    }
}

fn l2_normalized(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter().map(|x| x / norm).collect()
    } else {
        v.to_vec()
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// A k-means solution.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squared distances.
    pub wcss: f64,
}

/// Lloyd iterations from the given centroids until assignments stop
/// changing. An empty cluster keeps its previous centroid.
fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> KMeans {
    let dim = points[0].len();
    let mut assignments: Vec<usize> = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
        if next == assignments {
            break;
        }
        assignments = next;
        let mut sums = vec![vec![0.0; dim]; centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (p, &a) in points.iter().zip(&assignments) {
            sums[a].iter_mut().zip(p).for_each(|(s, x)| *s += x);
            counts[a] += 1;
        }
        for ((c, s), n) in centroids.iter_mut().zip(sums).zip(counts) {
            if n > 0 {
                *c = s.into_iter().map(|x| x / n as f64).collect();
            }
        }
    }
    let wcss = points
        .iter()
        .zip(&assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum();
    KMeans {
        assignments,
        centroids,
        wcss,
    }
}

/// k-means++ seeding: the first centroid uniformly, then each next one with
/// probability proportional to its squared distance from the chosen set.
fn kmeans_pp(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.random_range(0..points.len())].clone()];
    while centroids.len() < k {
        let d: Vec<f64> = points.iter().map(|p| nearest(p, &centroids).1).collect();
        let total: f64 = d.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            d.iter()
                .position(|&x| {
                    r -= x;
                    r < 0.0 && x > 0.0
                })
                .unwrap_or_else(|| d.iter().rposition(|&x| x > 0.0).unwrap_or(0))
        } else {
            rng.random_range(0..points.len())
        };
        centroids.push(points[pick].clone());
    }
    centroids
}

/// The best of several seeded k-means runs for a fixed `k`.
///
/// When a solution for `k - 1` is given, one run starts from its centroids
/// plus the point farthest from them, so the result is never worse than
/// that solution.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    previous: Option<&KMeans>,
    rng: &mut ChaCha8Rng,
) -> KMeans {
    let mut best: Option<KMeans> = None;
    let mut consider = |run: KMeans| {
        if best.as_ref().is_none_or(|b| run.wcss < b.wcss) {
            best = Some(run);
        }
    };
    if let Some(prev) = previous {
        let far = points
            .iter()
            .map(|p| nearest(p, &prev.centroids).1)
            .enumerate()
            .fold(
                (0, -1.0),
                |acc, (i, d)| if d > acc.1 { (i, d) } else { acc },
            )
            .0;
        let mut init = prev.centroids.clone();
        init.push(points[far].clone());
        consider(lloyd(points, init));
    }
    for _ in 0..RESTARTS - usize::from(previous.is_some()) {
        consider(lloyd(points, kmeans_pp(points, k, rng)));
    }
    best.expect("at least one restart")
}

/// Cluster assignments with the chosen cluster count.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Cluster index per input point, numbered by first appearance.
    pub assignments: Vec<usize>,
    pub k: usize,
    /// Best WCSS for each candidate `k`, starting at `k = 1`.
    pub wcss: Vec<f64>,
}

/// Picks `k` maximizing `W(k-1) - 2W(k) + W(k+1)`.
pub fn elbow(wcss: &[f64]) -> usize {
    if wcss.len() < 3 || wcss[0] <= EPS {
        return 1;
    }
    let mut best = (1, EPS * wcss[0]);
    for k in 2..wcss.len() {
        let d = wcss[k - 2] - 2.0 * wcss[k - 1] + wcss[k];
        if d > best.1 {
            best = (k, d);
        }
    }
    best.0
}

/// L2-normalizes the vectors, then clusters them with k-means over
/// `k = 1..=min(10, n)` and the elbow rule.
pub fn cluster_segments(vectors: &[Vec<f64>], seed: u64) -> Clustering {
    let n = vectors.len();
    if n <= 2 {
        return Clustering {
            assignments: vec![0; n],
            k: usize::from(n > 0),
            wcss: Vec::new(),
        };
    }
    let points: Vec<Vec<f64>> = vectors.iter().map(|v| l2_normalized(v)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut runs: Vec<KMeans> = Vec::new();
    for k in 1..=MAX_K.min(n) {
        let run = kmeans(&points, k, runs.last(), &mut rng);
        runs.push(run);
    }
    let wcss: Vec<f64> = runs.iter().map(|r| r.wcss).collect();
    let chosen = elbow(&wcss);

    // renumber by first appearance, dropping empty clusters
    let mut labels: Vec<Option<usize>> = vec![None; chosen];
    let mut next = 0;
    let assignments = runs[chosen - 1]
        .assignments
        .iter()
        .map(|&a| {
            *labels[a].get_or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    Clustering {
        assignments,
        k: next,
        wcss,
    }
}

/// Ranks clusters by size (ties by lowest member) and shows one seeded
/// random member from each of the top `max_clusters`.
///
/// `segments` must be in (session_id, question_id) order.
pub fn select_evidence(
    segments: &[&ScoredSegment],
    assignments: &[usize],
    k: usize,
    max_clusters: usize,
    seed: u64,
) -> EvidenceBundle {
    let n = segments.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &a) in assignments.iter().enumerate() {
        members[a].push(i);
    }
    members.retain(|m| !m.is_empty());
    members.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shown = vec![false; n];
    let clusters = members
        .iter()
        .take(max_clusters)
        .map(|m| {
            let pick = m[rng.random_range(0..m.len())];
            shown[pick] = true;
            EvidenceCluster {
                coverage_frac: m.len() as f64 / n as f64,
                size: m.len(),
                representative: SegmentRef::of(segments[pick]),
                transcript: segments[pick].segment.messages.clone(),
            }
        })
        .collect();
    let omitted_segment_refs = segments
        .iter()
        .zip(&shown)
        .filter(|(_, &s)| !s)
        .map(|(seg, _)| SegmentRef::of(seg))
        .collect();
    EvidenceBundle {
        clusters,
        omitted_segment_refs,
    }
}

/// Seed for one flag, so different flags draw independent streams.
fn flag_seed(seed: u64, question_id: u32, metric: Metric) -> u64 {
    let key = (u64::from(question_id) << 8) | metric as u64;
    seed ^ key.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Segments of the flagged question that individually breach the threshold,
/// in (session_id, question_id) order.
pub fn breaching_segments<'a>(
    flag: &Flag,
    segments: &'a [ScoredSegment],
    thresholds: &ThresholdSet,
) -> Vec<&'a ScoredSegment> {
    let mut out: Vec<&ScoredSegment> = segments
        .iter()
        .filter(|s| s.segment.question_id == flag.question_id)
        .filter(|s| {
            s.value(flag.metric)
                .is_some_and(|v| thresholds.breached(flag.metric, v))
        })
        .collect();
    out.sort_by(|a, b| SegmentRef::of(a).cmp(&SegmentRef::of(b)));
    out
}

/// Evidence for one flag. Empty when no single segment breaches.
pub fn extract_for_flag(
    flag: &Flag,
    segments: &[ScoredSegment],
    thresholds: &ThresholdSet,
    emb: &EmbeddingTable,
    max_clusters: usize,
    seed: u64,
) -> EvidenceBundle {
    let chosen = breaching_segments(flag, segments, thresholds);
    if chosen.is_empty() {
        return EvidenceBundle::default();
    }
    let seed = flag_seed(seed, flag.question_id, flag.metric);
    let vectors: Vec<Vec<f64>> = chosen
        .iter()
        .map(|s| embed_segment(s, emb).vector)
        .collect();
    let clustering = cluster_segments(&vectors, seed);
    select_evidence(
        &chosen,
        &clustering.assignments,
        clustering.k,
        max_clusters,
        seed,
    )
}
