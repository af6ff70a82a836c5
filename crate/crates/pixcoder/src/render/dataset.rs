//! Synthetic dataset generation and the JSON-lines manifest format.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{encode, sample_tree, BitVector, VectorLayout};
use crate::dsl::{serialize, DslTree};

use super::draw::render;
use super::theme::RenderTheme;
use super::{RasterImage, RenderError};

/// Native canvas size for synthetic renders.
pub const DEFAULT_RENDER_SIZE: usize = 256;

/// One dataset item: the tree, its label vector, and the rendered image.
#[derive(Debug, Clone)]
pub struct Sample {
    pub tree: DslTree,
    pub bits: BitVector,
    pub image: RasterImage,
    pub seed: u64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const TRAIN_SALT: u64 = 0x7261_696e;
const TEST_SALT: u64 = 0x7465_7374;

/// Draw the train and test trees: training trees freely, test trees re-drawn
/// until they differ from every training tree, as far as the pattern space
/// allows.
fn split_trees(
    n_train: usize,
    n_test: usize,
    layout: &VectorLayout,
    seed: u64,
) -> (Vec<DslTree>, Vec<DslTree>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_trees = Vec::with_capacity(n_train);
    let mut train_keys = std::collections::HashSet::new();
    for _ in 0..n_train {
        let tree = sample_tree(layout, &mut rng);
        train_keys.insert(tree.clone());
        train_trees.push(tree);
    }
    let mut test_trees = Vec::with_capacity(n_test);
    for _ in 0..n_test {
        let mut tree = sample_tree(layout, &mut rng);
        for _ in 0..100 {
            if !train_keys.contains(&tree) {
                break;
            }
            tree = sample_tree(layout, &mut rng);
        }
        test_trees.push(tree);
    }
    (train_trees, test_trees)
}

fn build_sample(
    tree: DslTree,
    index: usize,
    salt: u64,
    seed: u64,
    layout: &VectorLayout,
    theme: &RenderTheme,
    render_size: usize,
) -> Result<Sample, RenderError> {
    let sample_seed = splitmix64(seed ^ salt ^ (index as u64).wrapping_mul(0x2545_F491_4F6C_DD1D));
    let bits = encode(&tree, layout)?;
    let image = render(&tree, layout.grammar(), theme, sample_seed, render_size)?;
    Ok(Sample {
        tree,
        bits,
        image,
        seed: sample_seed,
    })
}

/// Generate disjoint train and test sets held fully in memory.
///
/// Trees come from the layout sampler (occupied row counts balanced); each
/// sample renders with its own derived seed. At the full 256-pixel canvas
/// this holds ~0.8 MB per sample; prefer [`gen_dataset_standardized`] or
/// [`generate_to_dir`] for large runs.
pub fn gen_dataset(
    n_train: usize,
    n_test: usize,
    layout: &VectorLayout,
    theme: &RenderTheme,
    seed: u64,
    render_size: usize,
) -> Result<(Vec<Sample>, Vec<Sample>), RenderError> {
    gen_dataset_mapped(n_train, n_test, layout, theme, seed, render_size, &|img| img)
}

/// [`gen_dataset`] but every image is standardized to `standard_size` as it
/// is produced, so only the small copies stay resident.
pub fn gen_dataset_standardized(
    n_train: usize,
    n_test: usize,
    layout: &VectorLayout,
    theme: &RenderTheme,
    seed: u64,
    render_size: usize,
    standard_size: usize,
) -> Result<(Vec<Sample>, Vec<Sample>), RenderError> {
    gen_dataset_mapped(n_train, n_test, layout, theme, seed, render_size, &|img| {
        super::standardize_image_to(&img, standard_size)
    })
}

fn gen_dataset_mapped(
    n_train: usize,
    n_test: usize,
    layout: &VectorLayout,
    theme: &RenderTheme,
    seed: u64,
    render_size: usize,
    map: &(dyn Fn(RasterImage) -> RasterImage + Sync),
) -> Result<(Vec<Sample>, Vec<Sample>), RenderError> {
    let (train_trees, test_trees) = split_trees(n_train, n_test, layout, seed);
    let build = |trees: Vec<DslTree>, salt: u64| -> Result<Vec<Sample>, RenderError> {
        trees
            .into_par_iter()
            .enumerate()
            .map(|(i, tree)| {
                let mut sample = build_sample(tree, i, salt, seed, layout, theme, render_size)?;
                sample.image = map(sample.image);
                Ok(sample)
            })
            .collect()
    };
    let train = build(train_trees, TRAIN_SALT)?;
    let test = build(test_trees, TEST_SALT)?;
    Ok((train, test))
}

/// Generate straight to disk in bounded memory: renders in chunks, writing
/// PNGs and manifest lines as they finish. Byte-identical to generating with
/// [`gen_dataset`] and then [`write_dataset`].
pub fn generate_to_dir(
    dir: &Path,
    n_train: usize,
    n_test: usize,
    layout: &VectorLayout,
    theme: &RenderTheme,
    seed: u64,
    render_size: usize,
) -> Result<(), RenderError> {
    let (train_trees, test_trees) = split_trees(n_train, n_test, layout, seed);
    fs::create_dir_all(dir.join("images"))?;
    fs::write(dir.join("layout.json"), layout.to_json())?;
    for (split, salt, trees) in [
        ("train", TRAIN_SALT, train_trees),
        ("test", TEST_SALT, test_trees),
    ] {
        let mut manifest = fs::File::create(dir.join(format!("{split}.jsonl")))?;
        const CHUNK: usize = 128;
        for (chunk_no, chunk) in trees.chunks(CHUNK).enumerate() {
            let samples: Result<Vec<Sample>, RenderError> = chunk
                .par_iter()
                .enumerate()
                .map(|(j, tree)| {
                    build_sample(
                        tree.clone(),
                        chunk_no * CHUNK + j,
                        salt,
                        seed,
                        layout,
                        theme,
                        render_size,
                    )
                })
                .collect();
            for (j, sample) in samples?.iter().enumerate() {
                let index = chunk_no * CHUNK + j;
                let rel = format!("images/{split}_{index:05}.png");
                sample.image.save_png(&dir.join(&rel))?;
                let entry = ManifestEntry {
                    image: rel,
                    dsl: serialize(&sample.tree)?,
                    bits: sample.bits.to_bit_string(),
                    layout: layout.id(),
                    seed: sample.seed,
                };
                writeln!(manifest, "{}", serde_json::to_string(&entry)?)?;
            }
        }
    }
    Ok(())
}

/// One manifest line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Image path relative to the manifest file.
    pub image: String,
    /// Canonical DSL text.
    pub dsl: String,
    /// Label vector as a 0/1 string.
    pub bits: String,
    /// Layout id, e.g. `ios-pruned`.
    pub layout: String,
    /// Render seed of the sample.
    pub seed: u64,
}

/// Write `<dir>/<split>.jsonl`, PNGs under `<dir>/images/`, and the layout
/// schema as `<dir>/layout.json`.
pub fn write_dataset(
    dir: &Path,
    split: &str,
    samples: &[Sample],
    layout: &VectorLayout,
) -> Result<(), RenderError> {
    let images = dir.join("images");
    fs::create_dir_all(&images)?;
    fs::write(dir.join("layout.json"), layout.to_json())?;
    let mut manifest = fs::File::create(dir.join(format!("{split}.jsonl")))?;
    for (i, sample) in samples.iter().enumerate() {
        let rel = format!("images/{split}_{i:05}.png");
        sample.image.save_png(&dir.join(&rel))?;
        let entry = ManifestEntry {
            image: rel,
            dsl: serialize(&sample.tree)?,
            bits: sample.bits.to_bit_string(),
            layout: layout.id(),
            seed: sample.seed,
        };
        writeln!(manifest, "{}", serde_json::to_string(&entry)?)?;
    }
    Ok(())
}

/// Read a JSON-lines manifest.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, RenderError> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

/// Draw `n` trees from the layout sampler without rendering; used for
/// distribution checks and baselines.
pub fn sample_trees(layout: &VectorLayout, n: usize, seed: u64) -> Vec<DslTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample_tree(layout, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{is_valid, layout_for};
    use crate::dsl::Platform;

    #[test]
    fn dataset_counts_and_validity() {
        let layout = layout_for(Platform::Web, true);
        let theme = RenderTheme::default();
        let (train, test) = gen_dataset(30, 10, &layout, &theme, 5, 64).unwrap();
        assert_eq!(train.len() + test.len(), 40);
        for s in train.iter().chain(&test) {
            assert!(is_valid(&s.bits, &layout).0);
            assert!(layout.grammar().accepts(&s.tree));
        }
        // Disjoint by tree identity (the web space is large enough).
        let train_set: std::collections::HashSet<_> = train.iter().map(|s| &s.tree).collect();
        assert!(test.iter().all(|s| !train_set.contains(&s.tree)));
    }

    #[test]
    fn generation_is_reproducible() {
        let layout = layout_for(Platform::Ios, true);
        let theme = RenderTheme::default();
        let (a, _) = gen_dataset(6, 2, &layout, &theme, 77, 64).unwrap();
        let (b, _) = gen_dataset(6, 2, &layout, &theme, 77, 64).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.tree, y.tree);
            assert_eq!(x.image, y.image);
        }
    }

    #[test]
    fn streaming_writer_matches_in_memory_generation() {
        let layout = layout_for(Platform::Web, true);
        let theme = RenderTheme::default();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        generate_to_dir(a.path(), 5, 2, &layout, &theme, 9, 48).unwrap();
        let (train, test) = gen_dataset(5, 2, &layout, &theme, 9, 48).unwrap();
        write_dataset(b.path(), "train", &train, &layout).unwrap();
        write_dataset(b.path(), "test", &test, &layout).unwrap();
        for split in ["train", "test"] {
            let ma = std::fs::read_to_string(a.path().join(format!("{split}.jsonl"))).unwrap();
            let mb = std::fs::read_to_string(b.path().join(format!("{split}.jsonl"))).unwrap();
            assert_eq!(ma, mb);
        }
        let pa = std::fs::read(a.path().join("images/train_00002.png")).unwrap();
        let pb = std::fs::read(b.path().join("images/train_00002.png")).unwrap();
        assert_eq!(pa, pb);
    }

    #[test]
    fn standardized_generation_shrinks_images() {
        let layout = layout_for(Platform::Ios, true);
        let theme = RenderTheme::default();
        let (train, _) = gen_dataset_standardized(3, 1, &layout, &theme, 2, 128, 64).unwrap();
        assert!(train.iter().all(|s| s.image.width() == 64));
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let layout = layout_for(Platform::Ios, true);
        let theme = RenderTheme::default();
        let (train, _) = gen_dataset(4, 1, &layout, &theme, 3, 32).unwrap();
        write_dataset(dir.path(), "train", &train, &layout).unwrap();
        let entries = read_manifest(&dir.path().join("train.jsonl")).unwrap();
        assert_eq!(entries.len(), 4);
        for (entry, sample) in entries.iter().zip(&train) {
            assert_eq!(entry.dsl, serialize(&sample.tree).unwrap());
            assert_eq!(entry.bits, sample.bits.to_bit_string());
            assert_eq!(entry.layout, "ios-pruned");
            assert!(dir.path().join(&entry.image).exists());
        }
    }
}
