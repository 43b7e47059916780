//! Corpus ingestion, preprocessing, grouped train/val/test splits and
//! emission of paired training data plus the Perlin test set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backproject::{build_pair, render_banded_mask};
use crate::banding::{BandingPattern, ExtractParams, PatternRecord};
use crate::error::{Error, Result};
use crate::imagecore::{
    components, load_raster, pad_square, resize, save_gray, side_by_side, threshold_dark,
    to_grayscale, GrayImage, PreprocessParams, ShapeMask, BACKGROUND,
};
use crate::metrics::ChromosomeClass;
use crate::perlin::{generate_perlin_pattern, splitmix64, PerlinConfig, PerlinDefaults};

pub const LABELS_FILE: &str = "labels.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Directory name of the Perlin-conditioned test pairs.
pub const TEST_PERLIN_DIR: &str = "test_perlin";

/// One chromosome image of the source corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceEntry {
    pub id: String,
    pub class: ChromosomeClass,
    /// Path relative to the corpus root, `/`-separated.
    pub source: String,
    /// Grouping key; chromosomes of one karyotype share a split.
    pub karyotype: String,
}

#[derive(Debug, Deserialize)]
struct LabelRow {
    id: String,
    class: String,
    source: String,
    #[serde(default)]
    karyotype: Option<String>,
}

fn rel_string(path: &Path) -> String {
    path.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

fn sorted_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    out.sort();
    Ok(out)
}

/// List the corpus under `root`, sorted by id. A `labels.csv` sidecar with
/// columns `id,class,source[,karyotype]` takes precedence; otherwise the
/// layout `<karyotype>/<class>/<name>.png` is walked and the file stem is
/// the id. Entries without a karyotype form their own group.
pub fn discover(root: &Path) -> Result<Vec<SourceEntry>> {
    let labels = root.join(LABELS_FILE);
    let mut entries = Vec::new();
    if labels.exists() {
        let mut rdr = csv::Reader::from_path(&labels)?;
        for row in rdr.deserialize() {
            let row: LabelRow = row?;
            let karyotype = row.karyotype.filter(|k| !k.is_empty()).unwrap_or_else(|| row.id.clone());
            entries.push(SourceEntry {
                class: row.class.parse()?,
                karyotype,
                source: row.source,
                id: row.id,
            });
        }
    } else {
        for kdir in sorted_dir(root)?.into_iter().filter(|p| p.is_dir()) {
            let karyotype = kdir.file_name().expect("dir entry").to_string_lossy().into_owned();
            for cdir in sorted_dir(&kdir)?.into_iter().filter(|p| p.is_dir()) {
                let class: ChromosomeClass = cdir.file_name().expect("dir entry").to_string_lossy().parse()?;
                for file in sorted_dir(&cdir)? {
                    if file.extension().and_then(|e| e.to_str()) != Some("png") {
                        continue;
                    }
                    let id = file.file_stem().expect("file").to_string_lossy().into_owned();
                    let rel = file.strip_prefix(root).expect("under root");
                    entries.push(SourceEntry {
                        id,
                        class,
                        source: rel_string(rel),
                        karyotype: karyotype.clone(),
                    });
                }
            }
        }
    }
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    let mut seen = BTreeSet::new();
    for e in &entries {
        if !seen.insert(e.id.as_str()) {
            return Err(Error::Dataset(format!("duplicate sample id {:?}", e.id)));
        }
        if e.id.is_empty() || e.id.contains(['/', '\\']) {
            return Err(Error::Dataset(format!("invalid sample id {:?}", e.id)));
        }
        if !root.join(&e.source).is_file() {
            return Err(Error::Dataset(format!("missing source file {:?}", e.source)));
        }
    }
    Ok(entries)
}

/// Pad to a `pad_target` square with the background fill, then resize.
pub fn preprocess(image: &GrayImage, pad_target: usize, params: &PreprocessParams) -> Result<GrayImage> {
    resize(&pad_square(image, pad_target, params.pad_fill)?, params.size)
}

/// Cut a karyotype image into single chromosomes: 4-connected dark
/// components of at least `min_area` pixels, each cropped with `margin`
/// and with every other component blanked to background.
pub fn split_karyotype(image: &GrayImage, min_area: usize, margin: usize) -> Vec<GrayImage> {
    let Ok(dark) = threshold_dark(image) else {
        return Vec::new();
    };
    let (w, h) = image.dims();
    components(&dark)
        .into_iter()
        .filter(|comp| comp.len() >= min_area)
        .map(|comp| {
            let mut own = ShapeMask::from_fn(w, h, |_, _| false);
            for &(r, c) in &comp {
                own.set(r, c, true);
            }
            let (r0, c0, r1, c1) = own.bounding_box().expect("non-empty component");
            let (r0, c0) = (r0.saturating_sub(margin), c0.saturating_sub(margin));
            let (r1, c1) = ((r1 + margin).min(h - 1), (c1 + margin).min(w - 1));
            GrayImage::from_fn(c1 - c0 + 1, r1 - r0 + 1, |r, c| {
                let (rr, cc) = (r + r0, c + c0);
                if dark.get(rr, cc) && !own.get(rr, cc) {
                    BACKGROUND
                } else {
                    image.get(rr, cc)
                }
            })
        })
        .collect()
}

/// Sizes of the train, val and test splits: val and test get
/// `round(0.15 n)` each (at least one), train the rest.
pub fn split_sizes(n: usize) -> Result<[usize; 3]> {
    if n < 3 {
        return Err(Error::TooFewEntries(n));
    }
    let held = ((n as f64 * 0.15).round() as usize).max(1);
    Ok([n - 2 * held, held, held])
}

/// Seeded grouped split. Karyotype groups are shuffled and each goes to
/// the split with the largest remaining deficit relative to its target
/// (train, val, test order on ties). With singleton groups the sizes match
/// [`split_sizes`] exactly; larger groups can overshoot by up to their size
/// minus one.
pub fn make_splits(entries: &[SourceEntry], seed: u64) -> Result<Vec<Split>> {
    let targets = split_sizes(entries.len())?;
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        groups.entry(e.karyotype.as_str()).or_default().push(i);
    }
    let mut order: Vec<Vec<usize>> = groups.into_values().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut counts = [0usize; 3];
    let mut out = vec![Split::Train; entries.len()];
    for group in order {
        // compare deficit / target without division
        let deficit = |s: usize| targets[s] as i64 - counts[s] as i64;
        let ahead = |s: usize, b: usize| {
            targets[s] > 0 && deficit(s) * targets[b].max(1) as i64 > deficit(b) * targets[s] as i64
        };
        let pick = (0..3).fold(0, |best, s| if ahead(s, best) { s } else { best });
        counts[pick] += group.len();
        for i in group {
            out[i] = Split::ALL[pick];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub class: ChromosomeClass,
    pub source: String,
    pub karyotype: String,
    pub split: Split,
    /// Side length of the padding square before resizing.
    pub pad_target: usize,
    /// Pattern length of the extracted banding, when extraction succeeded.
    pub length: Option<usize>,
    /// Perlin generation parameters for test samples.
    pub perlin: Option<PerlinConfig>,
    /// Reason this sample has no emitted pair.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub preprocess: PreprocessParams,
    pub extract: ExtractParams,
    pub perlin: PerlinDefaults,
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub config: DatasetConfig,
    /// Sample counts per split: train, val, test.
    pub split_counts: BTreeMap<Split, usize>,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }
}

/// Sidecar written next to every emitted pair image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMeta {
    pub id: String,
    pub class: ChromosomeClass,
    /// Banding pattern painted into the mask half.
    pub pattern: PatternRecord,
    /// Pattern extracted from the photo half, when it differs from `pattern`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_pattern: Option<PatternRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perlin: Option<PerlinConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perlin_seed_used: Option<u64>,
}

impl PairMeta {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Seed of the Perlin pattern for the `index`-th entry (in id order).
pub fn perlin_seed(seed: u64, index: usize) -> u64 {
    splitmix64(splitmix64(seed) ^ index as u64)
}

fn write_pair(dir: &Path, meta: &PairMeta, left: &GrayImage, right: &GrayImage) -> Result<()> {
    save_gray(&dir.join(format!("{}.png", meta.id)), &side_by_side(left, right)?)?;
    meta.write(&dir.join(format!("{}.json", meta.id)))
}

struct Emitted {
    length: Option<usize>,
    perlin: Option<PerlinConfig>,
    error: Option<String>,
}

fn emit_one(
    entry: &SourceEntry,
    split: Split,
    index: usize,
    image: &GrayImage,
    out: &Path,
    seed: u64,
    config: &DatasetConfig,
) -> Result<Emitted> {
    let pair = match build_pair(image, &config.extract) {
        Ok(p) => p,
        Err(e) => {
            log::warn!("sample {}: {e}", entry.id);
            return Ok(Emitted {
                length: None,
                perlin: None,
                error: Some(e.to_string()),
            });
        }
    };
    let pattern = &pair.extraction.pattern;
    let meta = PairMeta {
        id: entry.id.clone(),
        class: entry.class,
        pattern: pattern.to_record(),
        real_pattern: None,
        perlin: None,
        perlin_seed_used: None,
    };
    write_pair(&out.join("data").join(split.as_str()), &meta, &pair.mask.to_image(), image)?;
    let mut perlin = None;
    if split == Split::Test {
        let cfg = config.perlin.config(pattern.len(), perlin_seed(seed, index));
        let generated = generate_perlin_pattern(&cfg)?;
        let mask = render_banded_mask(&generated.pattern, &pair.extraction.mask, pair.extraction.frame())?;
        let meta = PairMeta {
            id: entry.id.clone(),
            class: entry.class,
            pattern: generated.pattern.to_record(),
            real_pattern: Some(pattern.to_record()),
            perlin: Some(cfg),
            perlin_seed_used: Some(generated.seed_used),
        };
        write_pair(&out.join("data").join(TEST_PERLIN_DIR), &meta, &mask.to_image(), image)?;
        perlin = Some(cfg);
    }
    Ok(Emitted {
        length: Some(pattern.len()),
        perlin,
        error: None,
    })
}

/// Build the full dataset under `out`: preprocessed images in `images/`,
/// side-by-side `[mask | photo]` pairs with JSON sidecars in
/// `data/{train,val,test,test_perlin}/`, and `manifest.json`.
pub fn build_dataset(src: &Path, out: &Path, seed: u64, config: &DatasetConfig) -> Result<Manifest> {
    let entries = discover(src)?;
    let splits = make_splits(&entries, seed)?;

    let loaded: Vec<GrayImage> = entries
        .par_iter()
        .map(|e| to_grayscale(&load_raster(&src.join(&e.source))?))
        .collect::<Result<_>>()?;
    let mut pad_targets: BTreeMap<&str, usize> = BTreeMap::new();
    for (e, img) in entries.iter().zip(&loaded) {
        let side = img.width().max(img.height());
        let t = pad_targets.entry(e.karyotype.as_str()).or_default();
        *t = (*t).max(side);
    }

    for dir in ["images", "data/train", "data/val", "data/test", "data/test_perlin"] {
        let d = out.join(dir);
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }

    let emitted: Vec<(usize, Emitted)> = entries
        .par_iter()
        .zip(&loaded)
        .enumerate()
        .map(|(i, (e, raw))| {
            let pad = pad_targets[e.karyotype.as_str()];
            let image = preprocess(raw, pad, &config.preprocess)?;
            save_gray(&out.join("images").join(format!("{}.png", e.id)), &image)?;
            Ok((pad, emit_one(e, splits[i], i, &image, out, seed, config)?))
        })
        .collect::<Result<_>>()?;

    let mut split_counts: BTreeMap<Split, usize> = Split::ALL.iter().map(|&s| (s, 0)).collect();
    for s in &splits {
        *split_counts.get_mut(s).expect("all splits present") += 1;
    }
    let manifest = Manifest {
        seed,
        config: config.clone(),
        split_counts,
        entries: entries
            .into_iter()
            .zip(splits)
            .zip(emitted)
            .map(|((e, split), (pad_target, em))| ManifestEntry {
                id: e.id,
                class: e.class,
                source: e.source,
                karyotype: e.karyotype,
                split,
                pad_target,
                length: em.length,
                perlin: em.perlin,
                error: em.error,
            })
            .collect(),
    };
    manifest.write(&out.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Loaded pair directory entry: the mask half, the photo half and its sidecar.
#[derive(Debug, Clone)]
pub struct LoadedPair {
    pub mask: crate::imagecore::BandedMask,
    pub image: GrayImage,
    pub meta: PairMeta,
}

impl LoadedPair {
    pub fn pattern(&self) -> Result<BandingPattern> {
        BandingPattern::try_from(self.meta.pattern.clone())
    }
}

/// Read every `{id}.png` + `{id}.json` pair in `dir`, sorted by id.
pub fn load_pairs(dir: &Path) -> Result<Vec<LoadedPair>> {
    let mut out = Vec::new();
    for path in sorted_dir(dir)? {
        if path.extension().and_then(|e| e.to_str()) != Some("png") {
            continue;
        }
        let meta_path = path.with_extension("json");
        if !meta_path.exists() {
            continue;
        }
        let meta = PairMeta::read(&meta_path)?;
        let pair = crate::imagecore::load_gray(&path)?;
        let (left, right) = crate::imagecore::split_side_by_side(&pair)?;
        out.push(LoadedPair {
            mask: crate::imagecore::BandedMask::from_image(&left)?,
            image: right,
            meta,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::{Raster, load_gray, split_side_by_side, BandedMask};
    use crate::synth::{write_corpus, SynthParams};

    fn entry(id: &str, karyotype: &str) -> SourceEntry {
        SourceEntry {
            id: id.into(),
            class: ChromosomeClass::new(1).unwrap(),
            source: format!("{id}.png"),
            karyotype: karyotype.into(),
        }
    }

    #[test]
    fn split_size_policy() {
        assert_eq!(split_sizes(20).unwrap(), [14, 3, 3]);
        assert_eq!(split_sizes(42_684).unwrap(), [29_878, 6_403, 6_403]);
        assert_eq!(split_sizes(3).unwrap(), [1, 1, 1]);
        assert!(matches!(split_sizes(2), Err(Error::TooFewEntries(2))));
    }

    #[test]
    fn singleton_groups_hit_targets_exactly() {
        let entries: Vec<_> = (0..20).map(|i| entry(&format!("s{i:02}"), &format!("s{i:02}"))).collect();
        let splits = make_splits(&entries, 9).unwrap();
        let count = |s| splits.iter().filter(|&&x| x == s).count();
        assert_eq!([count(Split::Train), count(Split::Val), count(Split::Test)], [14, 3, 3]);
        assert_eq!(splits, make_splits(&entries, 9).unwrap());
        assert_ne!(splits, make_splits(&entries, 10).unwrap());
    }

    #[test]
    fn groups_never_span_splits() {
        let entries: Vec<_> = (0..60).map(|i| entry(&format!("s{i:02}"), &format!("k{}", i / 4))).collect();
        for seed in 0..20 {
            let splits = make_splits(&entries, seed).unwrap();
            for g in 0..15 {
                let s = &splits[g * 4..g * 4 + 4];
                assert!(s.iter().all(|&x| x == s[0]));
            }
            let count = |s| splits.iter().filter(|&&x| x == s).count();
            // targets 42/9/9; groups of four overshoot by at most three
            for (s, t) in [(Split::Train, 42), (Split::Val, 9), (Split::Test, 9)] {
                assert!(count(s).abs_diff(t) <= 3, "{s}: {}", count(s));
            }
        }
    }

    #[test]
    fn few_large_groups_fill_every_split() {
        let entries: Vec<_> = (0..30).map(|i| entry(&format!("s{i:02}"), &format!("k{}", i / 10))).collect();
        for seed in 0..10 {
            let splits = make_splits(&entries, seed).unwrap();
            let count = |s| splits.iter().filter(|&&x| x == s).count();
            assert_eq!([count(Split::Train), count(Split::Val), count(Split::Test)], [10, 10, 10]);
        }
    }

    #[test]
    fn preprocess_stages() {
        let p = PreprocessParams::default();
        let img = GrayImage::from_fn(128, 128, |r, c| ((r * 3 + c) % 256) as u8);
        assert_eq!(preprocess(&img, 128, &p).unwrap(), img);
        let img = GrayImage::filled(60, 100, 10);
        let out = preprocess(&img, 100, &p).unwrap();
        assert_eq!(out.dims(), (128, 128));
        // 60 wide padded by 20 per side: left 25.6 px of the output is fill
        assert_eq!(out.get(64, 10), 255);
        assert_eq!(out.get(64, 64), 10);
        let rgb = Raster::new(2, 2, 3, vec![255, 0, 0, 0, 255, 0, 0, 0, 255, 255, 255, 255]).unwrap();
        let gray = to_grayscale(&rgb).unwrap();
        assert_eq!(preprocess(&gray, 2, &p).unwrap().dims(), (128, 128));
    }

    #[test]
    fn split_karyotype_cases() {
        let blobs = GrayImage::from_fn(60, 30, |r, c| {
            let blob = |r0: usize, c0: usize, s: usize| (r0..r0 + s).contains(&r) && (c0..c0 + s).contains(&c);
            if blob(5, 5, 8) || blob(5, 25, 8) || blob(15, 45, 10) || blob(25, 2, 2) {
                30
            } else {
                250
            }
        });
        let crops = split_karyotype(&blobs, 10, 2);
        assert_eq!(crops.len(), 3);
        assert_eq!(crops[0].dims(), (12, 12));
        assert_eq!(crops[2].dims(), (14, 14));
        assert_eq!(split_karyotype(&blobs, 0, 0).len(), 4);
        assert!(split_karyotype(&GrayImage::filled(10, 10, 255), 1, 1).is_empty());
    }

    #[test]
    fn split_karyotype_blanks_neighbors() {
        let img = GrayImage::from_fn(20, 10, |r, c| if (2..8).contains(&r) && !(6..=8).contains(&c) { 20 } else { 240 });
        let crops = split_karyotype(&img, 4, 3);
        assert_eq!(crops.len(), 2);
        // first crop reaches col 8 and must not show the second blob at col 9
        assert!(crops[0].data().iter().all(|&v| v == 20 || v == 240 || v == BACKGROUND));
        assert_eq!(crops[0].width(), 9);
        assert!((0..crops[0].height()).all(|r| crops[0].get(r, 8) != 20));
    }

    #[test]
    fn labels_sidecar_and_layout() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), 2, 2, 3, &SynthParams::default()).unwrap();
        let walked = discover(dir.path()).unwrap();
        assert_eq!(walked.len(), 4);
        assert_eq!(walked[0].id, "k000_00");
        assert_eq!(walked[0].source, "k000/1/k000_00.png");
        assert_eq!(walked[3].class.get(), 2);

        let csv = "id,class,source\na,X,k000/1/k000_00.png\nb,5,k001/2/k001_01.png\n";
        fs::write(dir.path().join(LABELS_FILE), csv).unwrap();
        let labelled = discover(dir.path()).unwrap();
        assert_eq!(labelled.len(), 2);
        assert_eq!(labelled[0].class, ChromosomeClass::SEX);
        assert_eq!(labelled[1].karyotype, "b");

        fs::write(dir.path().join(LABELS_FILE), "id,class,source\na,1,nope.png\n").unwrap();
        assert!(matches!(discover(dir.path()), Err(Error::Dataset(_))));
    }

    #[test]
    fn build_small_dataset() {
        let src = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        write_corpus(src.path(), 5, 4, 11, &SynthParams::default()).unwrap();
        let m = build_dataset(src.path(), out.path(), 7, &DatasetConfig::default()).unwrap();
        assert_eq!(m.entries.len(), 20);
        assert_eq!(m.split_counts.values().sum::<usize>(), 20);
        for e in &m.entries {
            assert!(e.error.is_none(), "{}: {:?}", e.id, e.error);
            let pair_path = out.path().join("data").join(e.split.as_str()).join(format!("{}.png", e.id));
            let pair = load_gray(&pair_path).unwrap();
            assert_eq!(pair.dims(), (256, 128));
            let (mask, photo) = split_side_by_side(&pair).unwrap();
            assert_eq!(photo, load_gray(&out.path().join("images").join(format!("{}.png", e.id))).unwrap());
            let mask = BandedMask::from_image(&mask).unwrap();
            assert_eq!(mask.foreground(), crate::imagecore::binarize(&photo).unwrap());
            assert_eq!(e.perlin.is_some(), e.split == Split::Test);
            if e.split == Split::Test {
                let p = out.path().join("data/test_perlin").join(format!("{}.png", e.id));
                let (pmask, pphoto) = split_side_by_side(&load_gray(&p).unwrap()).unwrap();
                assert_eq!(pphoto, photo);
                assert_eq!(BandedMask::from_image(&pmask).unwrap().foreground(), mask.foreground());
            }
        }
        let test = load_pairs(&out.path().join("data/test")).unwrap();
        let perlin = load_pairs(&out.path().join("data/test_perlin")).unwrap();
        assert_eq!(test.len(), perlin.len());
        assert_eq!(perlin[0].pattern().unwrap().len(), test[0].pattern().unwrap().len());
        assert!(perlin[0].meta.perlin.is_some());
        let text = fs::read_to_string(out.path().join(MANIFEST_FILE)).unwrap();
        assert!(!text.contains(&src.path().to_string_lossy().to_string()));
        assert_eq!(Manifest::read(&out.path().join(MANIFEST_FILE)).unwrap(), m);
    }
}
