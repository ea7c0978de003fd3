//! Line-delimited dataset manifests, corruption fan-out and splits.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::noise::{apply_with, NoiseLevel, NoiseModel, PresetTable, Profile};
use crate::raster::{load_image, read_label_csv, save_image, LabelPair};
use crate::{seed, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            _ => Err(Error::Parse(format!("unknown split {s:?}"))),
        }
    }
}

/// One image in a dataset. Labels are always those of the clean image.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    pub image_path: PathBuf,
    pub dataset: String,
    /// `None` until [`split_manifest`] assigns one.
    pub split: Option<Split>,
    pub noise_level: NoiseLevel,
    pub clean_id: String,
    pub beta0: u32,
    pub beta1: u32,
    pub seed: u64,
}

impl ManifestRecord {
    pub fn clean(id: String, image_path: PathBuf, dataset: &str, labels: LabelPair, seed: u64) -> Self {
        Self {
            clean_id: id.clone(),
            id,
            image_path,
            dataset: dataset.to_string(),
            split: None,
            noise_level: NoiseLevel::N0,
            beta0: labels.beta0,
            beta1: labels.beta1,
            seed,
        }
    }

    pub fn labels(&self) -> LabelPair {
        LabelPair::new(self.beta0, self.beta1)
    }
}

pub fn manifest_to_string(records: &[ManifestRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("manifest records serialize"));
        out.push('\n');
    }
    out
}

pub fn write_manifest(path: impl AsRef<Path>, records: &[ManifestRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(manifest_to_string(records).as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

/// Options for [`build_manifest`].
pub struct CorruptOptions<'a> {
    pub profile: Profile,
    pub levels: Vec<NoiseLevel>,
    pub presets: PresetTable,
    pub model: &'a dyn NoiseModel,
    pub seed: u64,
}

/// Seed of the noisy variant of `clean_id` at `level`.
pub fn variant_seed(seed: u64, clean_id: &str, level: NoiseLevel) -> u64 {
    seed::derive(seed ^ seed::hash_str(clean_id), level.index() as u64)
}

pub fn variant_id(clean_id: &str, level: NoiseLevel) -> String {
    match level {
        NoiseLevel::N0 => clean_id.to_string(),
        _ => format!("{clean_id}_{level}"),
    }
}

/// Reads `<clean_dir>/labels.csv` and `<clean_dir>/images/<id>.png`, writes
/// every requested noise variant to `<out_dir>/images/` and returns the
/// records in (clean id, level) order. N0 images are copied unchanged.
pub fn build_manifest(clean_dir: impl AsRef<Path>, out_dir: impl AsRef<Path>, opts: &CorruptOptions<'_>) -> Result<Vec<ManifestRecord>> {
    let (clean_dir, out_dir) = (clean_dir.as_ref(), out_dir.as_ref());
    let labels_path = clean_dir.join("labels.csv");
    if !labels_path.exists() {
        return Err(Error::Missing(format!("labels file {}", labels_path.display())));
    }
    let labels = read_label_csv(&labels_path)?;
    let presets = opts
        .levels
        .iter()
        .map(|&l| opts.presets.get(opts.profile, l))
        .collect::<Result<Vec<_>>>()?;
    let images = out_dir.join("images");
    fs::create_dir_all(&images).map_err(|e| Error::io(&images, e))?;
    let dataset = opts.profile.name();
    let per_image = labels
        .par_iter()
        .map(|(clean_id, pair)| {
            let src = clean_dir.join("images").join(format!("{clean_id}.png"));
            if !src.exists() {
                return Err(Error::Missing(format!("clean image {}", src.display())));
            }
            let clean = load_image(&src)?;
            presets
                .iter()
                .map(|preset| {
                    let id = variant_id(clean_id, preset.level);
                    let seed = variant_seed(opts.seed, clean_id, preset.level);
                    let img = apply_with(opts.model, &clean, preset, seed)?;
                    let rel = PathBuf::from("images").join(format!("{id}.png"));
                    save_image(&img, out_dir.join(&rel))?;
                    Ok(ManifestRecord {
                        id,
                        image_path: rel,
                        dataset: dataset.to_string(),
                        split: None,
                        noise_level: preset.level,
                        clean_id: clean_id.clone(),
                        beta0: pair.beta0,
                        beta1: pair.beta1,
                        seed,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_image.into_iter().flatten().collect())
}

/// Assigns splits per clean id so that all variants of one clean image share
/// a split. Counts are rounded from `ratios`; the test split takes the rest.
pub fn split_manifest(records: &mut [ManifestRecord], ratios: (f64, f64, f64), seed: u64) -> Result<()> {
    let (tr, va, te) = ratios;
    if [tr, va, te].iter().any(|r| !(0.0..=1.0).contains(r)) || ((tr + va + te) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("split ratios {ratios:?} must be in [0, 1] and sum to 1")));
    }
    let mut ids: Vec<&str> = records.iter().map(|r| r.clean_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    let mut ids: Vec<String> = ids.into_iter().map(str::to_string).collect();
    ids.shuffle(&mut seed::rng(seed::derive(seed, 0x5B17)));
    let n = ids.len();
    let n_train = ((n as f64) * tr).round() as usize;
    let n_val = (((n as f64) * va).round() as usize).min(n - n_train);
    let assignment: BTreeMap<String, Split> = ids
        .into_iter()
        .enumerate()
        .map(|(i, id)| {
            let split = if i < n_train {
                Split::Train
            } else if i < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
            (id, split)
        })
        .collect();
    for r in records.iter_mut() {
        r.split = Some(assignment[&r.clean_id]);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::default_model;
    use crate::raster::{write_label_csv, BinaryImage};

    fn record(id: &str, clean: &str, level: NoiseLevel) -> ManifestRecord {
        ManifestRecord {
            id: id.into(),
            image_path: PathBuf::from(format!("images/{id}.png")),
            dataset: "voronoi".into(),
            split: None,
            noise_level: level,
            clean_id: clean.into(),
            beta0: 2,
            beta1: 3,
            seed: 9,
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut rs = vec![record("a", "a", NoiseLevel::N0), record("a_N2", "a", NoiseLevel::N2)];
        rs[1].split = Some(Split::Val);
        let p = dir.path().join("m.jsonl");
        write_manifest(&p, &rs).unwrap();
        assert_eq!(read_manifest(&p).unwrap(), rs);
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.contains("\"split\":\"val\"") && text.contains("\"noise_level\":\"N2\""));
        assert_eq!(text.lines().count(), 2);
        fs::write(&p, "{not json}\n").unwrap();
        assert!(read_manifest(&p).is_err());
    }

    #[test]
    fn split_counts_and_leakage() {
        let mut rs: Vec<ManifestRecord> = (0..100)
            .flat_map(|i| {
                NoiseLevel::ALL.map(|l| record(&variant_id(&format!("c{i:03}"), l), &format!("c{i:03}"), l))
            })
            .collect();
        split_manifest(&mut rs, (0.7, 0.15, 0.15), 5).unwrap();
        let mut per_split: BTreeMap<Split, std::collections::BTreeSet<&str>> = BTreeMap::new();
        for r in &rs {
            per_split.entry(r.split.unwrap()).or_default().insert(&r.clean_id);
        }
        let sizes: Vec<usize> = per_split.values().map(|s| s.len()).collect();
        assert_eq!(sizes, vec![70, 15, 15]);
        for r in &rs {
            let first = rs.iter().find(|o| o.clean_id == r.clean_id).unwrap();
            assert_eq!(first.split, r.split);
        }
        let mut again = rs.clone();
        split_manifest(&mut again, (0.7, 0.15, 0.15), 5).unwrap();
        assert_eq!(again, rs);
        let mut other = rs.clone();
        split_manifest(&mut other, (0.7, 0.15, 0.15), 6).unwrap();
        assert_ne!(other, rs);
        assert!(split_manifest(&mut rs, (0.5, 0.5, 0.5), 1).is_err());
    }

    #[test]
    fn build_fans_out_five_variants() {
        let dir = tempfile::tempdir().unwrap();
        let clean = dir.path().join("clean");
        fs::create_dir_all(clean.join("images")).unwrap();
        let mut rows = Vec::new();
        for i in 0..10 {
            let id = format!("img{i}");
            let img = BinaryImage::from_fn(40, 40, |x, y| (x + i) % 13 < 6 || y % 11 < 5);
            save_image(&img, clean.join("images").join(format!("{id}.png"))).unwrap();
            rows.push((id, crate::raster::betti_labels(&img)));
        }
        write_label_csv(clean.join("labels.csv"), rows.iter().map(|(i, l)| (i.as_str(), *l))).unwrap();
        let opts = CorruptOptions {
            profile: Profile::Voronoi,
            levels: NoiseLevel::ALL.to_vec(),
            presets: PresetTable::builtin(),
            model: default_model(Profile::Voronoi),
            seed: 3,
        };
        let out = dir.path().join("out");
        let rs = build_manifest(&clean, &out, &opts).unwrap();
        assert_eq!(rs.len(), 50);
        for r in &rs {
            let (_, l) = rows.iter().find(|(id, _)| *id == r.clean_id).unwrap();
            assert_eq!(r.labels(), *l);
            assert!(out.join(&r.image_path).exists());
            if r.noise_level == NoiseLevel::N0 {
                assert_eq!(r.id, r.clean_id);
                assert_eq!(
                    load_image(out.join(&r.image_path)).unwrap(),
                    load_image(clean.join("images").join(format!("{}.png", r.id))).unwrap()
                );
            }
        }
        let again = build_manifest(&clean, dir.path().join("out2"), &opts).unwrap();
        assert_eq!(manifest_to_string(&again), manifest_to_string(&rs));

        fs::remove_file(clean.join("labels.csv")).unwrap();
        assert!(matches!(build_manifest(&clean, &out, &opts), Err(Error::Missing(_))));
    }
}
