//! Synthetic Voronoi wall images with controlled topology.
//!
//! Random points are grouped by k-means into territories (pixels nearest to a
//! cluster centroid). Inside each territory, walls follow the Voronoi edges
//! between that cluster's own points, with a Perlin-modulated thickness. A
//! band along territory boundaries is left empty so clusters stay apart.

use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::harness::ManifestRecord;
use crate::noise::perlin;
use crate::noise::NoiseLevel;
use crate::raster::{betti_labels, connected_components, save_image, write_label_csv, BinaryImage, Connectivity, LabelPair};
use crate::sedt::{edt_squared, Phase};
use crate::{seed, Error, Result};

pub const DATASET: &str = "voronoi";
pub const RETRY_BUDGET: u32 = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub image_size: usize,
    /// Inclusive range for the number of clusters.
    pub k_clusters: (usize, usize),
    /// Inclusive range for the points drawn per cluster.
    pub sites_per_cluster: (usize, usize),
    /// Wall thickness range in pixels, modulated by Perlin noise.
    pub wall_thickness: (f64, f64),
    pub perlin_scale: f64,
    pub lloyd_iters: usize,
    /// Width in pixels of the empty band along territory boundaries.
    pub territory_gap: f64,
    /// Minimum distance between sampled points; 0 disables the check.
    pub min_site_spacing: f64,
    /// Enclosed holes whose inradius is below this are filled; 0 keeps all.
    pub min_hole_radius: u32,
    /// Wall fragments thinner than this radius are removed; 0 keeps all.
    pub min_component_radius: u32,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            image_size: 512,
            k_clusters: (1, 5),
            sites_per_cluster: (6, 20),
            wall_thickness: (8.0, 12.0),
            perlin_scale: 0.01,
            lloyd_iters: 10,
            territory_gap: 32.0,
            min_site_spacing: 24.0,
            min_hole_radius: 4,
            min_component_radius: 3,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.image_size < 32 {
            return bad("image size must be at least 32");
        }
        let (k0, k1) = self.k_clusters;
        if k0 < 1 || k1 > 5 || k0 > k1 {
            return bad("cluster range must lie within [1, 5]");
        }
        let (s0, s1) = self.sites_per_cluster;
        if s0 < 1 || s0 > s1 {
            return bad("sites per cluster range is invalid");
        }
        let (t0, t1) = self.wall_thickness;
        if !(t0 > 0.0 && t0 <= t1) {
            return bad("wall thickness range must be positive");
        }
        if self.perlin_scale <= 0.0 {
            return bad("perlin scale must be positive");
        }
        if self.territory_gap < 0.0 || self.min_site_spacing < 0.0 {
            return bad("gap and spacing must be non-negative");
        }
        Ok(())
    }
}

pub type Point = (f64, f64);

fn dist2(a: Point, b: Point) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

fn nearest(p: Point, centroids: &[Point]) -> usize {
    let mut best = 0;
    for (i, &c) in centroids.iter().enumerate().skip(1) {
        if dist2(p, c) < dist2(p, centroids[best]) {
            best = i;
        }
    }
    best
}

/// Lloyd's algorithm from `k` distinct random points. A cluster that empties
/// is re-seeded at the point farthest from its current centroid. The returned
/// assignment is the nearest-centroid assignment for the returned centroids.
pub fn lloyd_kmeans(points: &[Point], k: usize, iters: usize, seed: u64) -> Result<(Vec<Point>, Vec<usize>)> {
    if k == 0 || points.is_empty() {
        return Err(Error::InvalidArgument("k-means needs k >= 1 and at least one point".into()));
    }
    if k > points.len() {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds {} points", points.len())));
    }
    let mut rng = seed::rng(seed);
    let init = rand::seq::index::sample(&mut rng, points.len(), k);
    let mut centroids: Vec<Point> = init.iter().map(|i| points[i]).collect();
    let mut assignment: Vec<usize> = points.iter().map(|&p| nearest(p, &centroids)).collect();
    for _ in 0..iters {
        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for (&p, &c) in points.iter().zip(&assignment) {
            sums[c].0 += p.0;
            sums[c].1 += p.1;
            sums[c].2 += 1;
        }
        for c in 0..k {
            let (sx, sy, n) = sums[c];
            if n > 0 {
                centroids[c] = (sx / n as f64, sy / n as f64);
            } else {
                let far = (0..points.len())
                    .max_by(|&a, &b| {
                        let da = dist2(points[a], centroids[assignment[a]]);
                        let db = dist2(points[b], centroids[assignment[b]]);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .expect("points are non-empty");
                centroids[c] = points[far];
                assignment[far] = c;
            }
        }
        assignment = points.iter().map(|&p| nearest(p, &centroids)).collect();
    }
    Ok((centroids, assignment))
}

fn cluster_members(sites: &[Point], cluster_of: &[usize]) -> Vec<Vec<Point>> {
    let k = cluster_of.iter().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<Point>> = vec![Vec::new(); k];
    for (&s, &c) in sites.iter().zip(cluster_of) {
        members[c].push(s);
    }
    members
}

fn cluster_means(members: &[Vec<Point>]) -> Vec<Option<Point>> {
    members
        .iter()
        .map(|m| {
            (!m.is_empty()).then(|| {
                let n = m.len() as f64;
                (m.iter().map(|p| p.0).sum::<f64>() / n, m.iter().map(|p| p.1).sum::<f64>() / n)
            })
        })
        .collect()
}

/// Territory index of every pixel: the cluster with the nearest mean.
pub fn territories(sites: &[Point], cluster_of: &[usize], size: usize) -> Vec<usize> {
    let centroids = cluster_means(&cluster_members(sites, cluster_of));
    let mut out = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let p = (x as f64, y as f64);
            let c = centroids
                .iter()
                .enumerate()
                .filter_map(|(c, m)| m.map(|m| (c, dist2(p, m))))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map_or(0, |(c, _)| c);
            out.push(c);
        }
    }
    out
}

/// Keeps the largest 8-connected foreground piece inside each territory.
/// Ties go to the piece found first in row-major order.
pub fn keep_largest_per_territory(img: &BinaryImage, territory: &[usize]) -> BinaryImage {
    let w = img.width();
    let mut keep = vec![false; w * img.height()];
    let k = territory.iter().max().map_or(0, |m| m + 1);
    for c in 0..k {
        let own = BinaryImage::from_fn(w, img.height(), |x, y| img.get(x, y) && territory[y * w + x] == c);
        let (count, labels) = connected_components(&own, Connectivity::Eight);
        if count == 0 {
            continue;
        }
        let mut sizes = vec![0usize; count + 1];
        for &l in &labels {
            sizes[l as usize] += 1;
        }
        let best = (1..=count).fold(1, |b, l| if sizes[l] > sizes[b] { l } else { b });
        for (k, &l) in keep.iter_mut().zip(&labels) {
            *k |= l as usize == best;
        }
    }
    BinaryImage::new(w, img.height(), keep).expect("same shape as the input")
}

/// Distance from `p` to the nearest bisector between `own` (the site closest
/// to `p`) and any other site.
fn bisector_distance(p: Point, own: Point, sites: &[Point]) -> f64 {
    let d_own = dist2(p, own);
    sites
        .iter()
        .filter(|&&s| s != own)
        .map(|&s| (dist2(p, s) - d_own) / (2.0 * dist2(s, own).sqrt()))
        .fold(f64::INFINITY, f64::min)
}

/// Rasterizes same-cluster Voronoi walls.
///
/// Pixel `p` in territory `c` is a wall when it lies within `thickness[p] / 2`
/// of a bisector between its nearest cluster-`c` site and another one, so
/// walls keep a constant width along each edge. Territories come from the
/// cluster means; pixels within `territory_gap / 2` of a territory boundary
/// stay empty.
pub fn rasterize_walls(
    sites: &[Point],
    cluster_of: &[usize],
    thickness: &[f64],
    size: usize,
    territory_gap: f64,
) -> Result<BinaryImage> {
    if sites.is_empty() || sites.len() != cluster_of.len() {
        return Err(Error::InvalidArgument("need at least one site with a cluster each".into()));
    }
    if thickness.len() != size * size {
        return Err(Error::InvalidArgument("thickness field does not match image size".into()));
    }
    let members = cluster_members(sites, cluster_of);
    let centroids = cluster_means(&members);

    let live: Vec<Point> = centroids.iter().flatten().copied().collect();
    let rows: Vec<Vec<bool>> = (0..size)
        .into_par_iter()
        .map(|y| {
            (0..size)
                .map(|x| {
                    let p = (x as f64, y as f64);
                    let Some(c1) = centroids
                        .iter()
                        .enumerate()
                        .filter_map(|(c, m)| m.map(|m| (c, dist2(p, m))))
                        .min_by(|a, b| a.1.total_cmp(&b.1))
                        .map(|(c, _)| c)
                    else {
                        return false;
                    };
                    if bisector_distance(p, centroids[c1].unwrap(), &live) <= territory_gap / 2.0 {
                        return false;
                    }
                    let own = &members[c1];
                    if own.len() < 2 {
                        return false;
                    }
                    let s1 = own.iter().copied().min_by(|a, b| dist2(p, *a).total_cmp(&dist2(p, *b))).unwrap();
                    bisector_distance(p, s1, own) <= thickness[y * size + x] / 2.0
                })
                .collect()
        })
        .collect();
    BinaryImage::new(size, size, rows.concat())
}

/// Fills enclosed background components whose largest distance to the
/// foreground is below `radius`.
pub fn fill_small_holes(img: &BinaryImage, radius: u32) -> BinaryImage {
    if radius == 0 {
        return img.clone();
    }
    let (w, h) = (img.width(), img.height());
    let (count, labels) = connected_components(&img.invert(), Connectivity::Four);
    let depth = edt_squared(img, Phase::Foreground);
    let mut touches_border = vec![false; count + 1];
    let mut deepest = vec![0i64; count + 1];
    for y in 0..h {
        for x in 0..w {
            let l = labels[y * w + x] as usize;
            if l == 0 {
                continue;
            }
            if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                touches_border[l] = true;
            }
            deepest[l] = deepest[l].max(depth.get(x, y));
        }
    }
    let limit = i64::from(radius) * i64::from(radius);
    BinaryImage::from_fn(w, h, |x, y| {
        let l = labels[y * w + x] as usize;
        img.get(x, y) || (!touches_border[l] && deepest[l] < limit)
    })
}

/// Clears foreground components whose largest distance to the background is
/// below `radius`.
pub fn remove_small_components(img: &BinaryImage, radius: u32) -> BinaryImage {
    if radius == 0 {
        return img.clone();
    }
    let w = img.width();
    let (count, labels) = connected_components(img, Connectivity::Eight);
    let depth = edt_squared(img, Phase::Background);
    let mut deepest = vec![0i64; count + 1];
    for (i, &l) in labels.iter().enumerate() {
        deepest[l as usize] = deepest[l as usize].max(depth.values()[i]);
    }
    let limit = i64::from(radius) * i64::from(radius);
    BinaryImage::from_fn(w, img.height(), |x, y| {
        let l = labels[y * w + x] as usize;
        l != 0 && deepest[l] >= limit
    })
}

fn sample_sites(rng: &mut impl Rng, n: usize, size: usize, spacing: f64) -> Vec<Point> {
    let mut sites: Vec<Point> = Vec::with_capacity(n);
    let limit = size as f64;
    let mut attempts = 0;
    while sites.len() < n {
        let p = (rng.random_range(0.0..limit), rng.random_range(0.0..limit));
        attempts += 1;
        // dart throwing; relax the spacing once the plane is crowded
        if attempts > 200 * n || sites.iter().all(|&s| dist2(p, s) >= spacing * spacing) {
            sites.push(p);
        }
    }
    sites
}

/// One clean sample and its labels, before any range check.
pub fn draw_sample(cfg: &SynthConfig, attempt_seed: u64) -> Result<BinaryImage> {
    let mut rng = seed::rng(seed::derive(attempt_seed, 1));
    let k = rng.random_range(cfg.k_clusters.0..=cfg.k_clusters.1);
    let n: usize = (0..k)
        .map(|_| rng.random_range(cfg.sites_per_cluster.0..=cfg.sites_per_cluster.1))
        .sum();
    let sites = sample_sites(&mut rng, n.max(k), cfg.image_size, cfg.min_site_spacing);
    let (_, assignment) = lloyd_kmeans(&sites, k, cfg.lloyd_iters, seed::derive(attempt_seed, 2))?;
    let (t0, t1) = cfg.wall_thickness;
    let thickness: Vec<f64> = perlin(cfg.image_size, cfg.image_size, cfg.perlin_scale, seed::derive(attempt_seed, 3))
        .into_iter()
        .map(|v| t0 + (t1 - t0) * v)
        .collect();
    let walls = rasterize_walls(&sites, &assignment, &thickness, cfg.image_size, cfg.territory_gap)?;
    let walls = keep_largest_per_territory(&walls, &territories(&sites, &assignment, cfg.image_size));
    let walls = remove_small_components(&walls, cfg.min_component_radius);
    Ok(fill_small_holes(&walls, cfg.min_hole_radius))
}

fn labels_in_range(l: &LabelPair) -> bool {
    (1..=5).contains(&l.beta0) && l.beta1 <= 50
}

/// Draws samples until the labels fall in β0 ∈ [1, 5], β1 ∈ [0, 50].
pub fn generate_sample(cfg: &SynthConfig, sample_seed: u64) -> Result<(BinaryImage, LabelPair)> {
    cfg.validate()?;
    for attempt in 0..RETRY_BUDGET {
        let img = draw_sample(cfg, seed::derive(sample_seed, u64::from(attempt)))?;
        let labels = betti_labels(&img);
        if labels_in_range(&labels) {
            return Ok((img, labels));
        }
    }
    Err(Error::RetryBudgetExhausted { retries: RETRY_BUDGET })
}

pub fn sample_id(index: usize) -> String {
    format!("{DATASET}_{index:06}")
}

/// Generates `n` samples into `out_dir` (`images/<id>.png`, `labels.csv`,
/// `manifest.jsonl`). Sample `i` uses seed `cfg.seed ^ i`.
pub fn generate_dataset(cfg: &SynthConfig, n: usize, out_dir: impl AsRef<Path>) -> Result<Vec<ManifestRecord>> {
    cfg.validate()?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let out_dir = out_dir.as_ref();
    let images = out_dir.join("images");
    std::fs::create_dir_all(&images).map_err(|e| Error::io(&images, e))?;
    let records = (0..n)
        .into_par_iter()
        .map(|i| {
            let sample_seed = cfg.seed ^ i as u64;
            let (img, labels) = generate_sample(cfg, sample_seed)?;
            let id = sample_id(i);
            let rel = PathBuf::from("images").join(format!("{id}.png"));
            save_image(&img, out_dir.join(&rel))?;
            Ok(ManifestRecord::clean(id, rel, DATASET, labels, sample_seed))
        })
        .collect::<Result<Vec<_>>>()?;
    write_label_csv(
        out_dir.join("labels.csv"),
        records.iter().map(|r| (r.id.as_str(), r.labels())),
    )?;
    crate::harness::write_manifest(out_dir.join("manifest.jsonl"), &records)?;
    debug_assert!(records.iter().all(|r| r.noise_level == NoiseLevel::N0));
    Ok(records)
}
