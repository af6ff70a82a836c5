//! Binary model checkpoints.
//!
//! Layout (little-endian):
//!   magic `PXCM` | version u32 | layout-id (u32 len + utf8)
//!   | input_size u32 | conv widths 3xu32 | fc width u32 | output width u32
//!   | output mode u8 (0 logistic, 1 region softmax; mode 1 is followed by
//!     u32 span count and (offset u32, width u32) pairs)
//!   | threshold flag u8 + f64
//!   | parameter tensors in model order, each u32 length + f32 values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::num::Scalar;

use super::{ModelSpec, NnError, OutputMode, VisionModel};

const MAGIC: &[u8; 4] = b"PXCM";
const VERSION: u32 = 1;

fn put_u32<W: Write>(w: &mut W, v: u32) -> Result<(), NnError> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_f32<W: Write>(w: &mut W, v: f32) -> Result<(), NnError> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get_u32<R: Read>(r: &mut R) -> Result<u32, NnError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn get_f32<R: Read>(r: &mut R) -> Result<f32, NnError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(f32::from_le_bytes(buf))
}

fn get_u8<R: Read>(r: &mut R) -> Result<u8, NnError> {
    let mut buf = [0u8; 1];
    r.read_exact(&mut buf)?;
    Ok(buf[0])
}

/// Write a checkpoint. Weights are stored as 32-bit floats whatever the
/// model's scalar type.
pub fn save_model<F: Scalar>(model: &VisionModel<F>, layout_id: &str, path: &Path) -> Result<(), NnError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    put_u32(&mut w, VERSION)?;
    put_u32(&mut w, layout_id.len() as u32)?;
    w.write_all(layout_id.as_bytes())?;
    let spec = model.spec();
    put_u32(&mut w, spec.input_size as u32)?;
    for cw in spec.conv_widths {
        put_u32(&mut w, cw as u32)?;
    }
    put_u32(&mut w, spec.fc_width as u32)?;
    put_u32(&mut w, spec.output_width as u32)?;
    match model.output_mode() {
        OutputMode::Logistic => w.write_all(&[0u8])?,
        OutputMode::RegionSoftmax { spans } => {
            w.write_all(&[1u8])?;
            put_u32(&mut w, spans.len() as u32)?;
            for &(offset, width) in spans {
                put_u32(&mut w, offset as u32)?;
                put_u32(&mut w, width as u32)?;
            }
        }
    }
    match model.threshold() {
        Some(t) => {
            w.write_all(&[1u8])?;
            w.write_all(&t.to_le_bytes())?;
        }
        None => {
            w.write_all(&[0u8])?;
            w.write_all(&0f64.to_le_bytes())?;
        }
    }
    for slice in model.param_slices() {
        put_u32(&mut w, slice.len() as u32)?;
        for &v in slice {
            put_f32(&mut w, v.to_f32().unwrap_or(f32::NAN))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a checkpoint back; returns the model and its layout id.
pub fn load_model<F: Scalar>(path: &Path) -> Result<(VisionModel<F>, String), NnError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(NnError::Checkpoint(format!(
            "{}: not a model checkpoint",
            path.display()
        )));
    }
    let version = get_u32(&mut r)?;
    if version != VERSION {
        return Err(NnError::Checkpoint(format!("unsupported version {version}")));
    }
    let id_len = get_u32(&mut r)? as usize;
    let mut id_bytes = vec![0u8; id_len];
    r.read_exact(&mut id_bytes)?;
    let layout_id = String::from_utf8(id_bytes)
        .map_err(|_| NnError::Checkpoint("layout id is not utf8".to_string()))?;
    let input_size = get_u32(&mut r)? as usize;
    let conv_widths = [
        get_u32(&mut r)? as usize,
        get_u32(&mut r)? as usize,
        get_u32(&mut r)? as usize,
    ];
    let fc_width = get_u32(&mut r)? as usize;
    let output_width = get_u32(&mut r)? as usize;
    let spec = ModelSpec {
        input_size,
        conv_widths,
        fc_width,
        output_width,
    };
    let mode = match get_u8(&mut r)? {
        0 => OutputMode::Logistic,
        1 => {
            let n = get_u32(&mut r)? as usize;
            let mut spans = Vec::with_capacity(n);
            for _ in 0..n {
                let offset = get_u32(&mut r)? as usize;
                let width = get_u32(&mut r)? as usize;
                spans.push((offset, width));
            }
            OutputMode::RegionSoftmax { spans }
        }
        other => return Err(NnError::Checkpoint(format!("unknown output mode {other}"))),
    };
    let has_threshold = get_u8(&mut r)? != 0;
    let threshold = {
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        f64::from_le_bytes(buf)
    };

    let mut model = VisionModel::<F>::build(spec, 0);
    model.set_output_mode(mode);
    if has_threshold {
        model.set_threshold(threshold);
    }
    for slice in model.param_slices_mut() {
        let len = get_u32(&mut r)? as usize;
        if len != slice.len() {
            return Err(NnError::Checkpoint(format!(
                "tensor length {len} does not match expected {}",
                slice.len()
            )));
        }
        for v in slice.iter_mut() {
            *v = F::from_f64_lossy(get_f32(&mut r)? as f64);
        }
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(NnError::Checkpoint("trailing bytes after tensors".to_string()));
    }
    Ok((model, layout_id))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.pxc");
        let mut model = VisionModel::<f32>::build(ModelSpec::downsized(12), 9);
        model.set_threshold(0.01);
        save_model(&model, "web-pruned", &path).unwrap();
        let (loaded, id) = load_model::<f32>(&path).unwrap();
        assert_eq!(id, "web-pruned");
        assert_eq!(loaded, model);
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"not a checkpoint").unwrap();
        assert!(matches!(
            load_model::<f32>(&path),
            Err(NnError::Checkpoint(_))
        ));
    }
}
