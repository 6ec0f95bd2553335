//! Parameter checkpoints: a flat little-endian f32 binary next to a JSON
//! sidecar describing layer shapes and the head tag.
//!
//! `<base>.bin` holds, per layer, the weight matrix (row-major) followed
//! by the bias vector. `<base>.json` holds the metadata.

use super::{Head, Mlp};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    sizes: Vec<usize>,
    head: Head,
}

pub fn save_mlp(net: &Mlp, base: &Path) -> io::Result<()> {
    let sidecar = Sidecar {
        sizes: net.sizes.clone(),
        head: net.head,
    };
    fs::write(
        base.with_extension("json"),
        serde_json::to_string_pretty(&sidecar).expect("sidecar serializes"),
    )?;
    let mut bin = fs::File::create(base.with_extension("bin"))?;
    let mut buf = Vec::with_capacity(net.param_count() * 4);
    for l in 0..net.weights.len() {
        for &x in &net.weights[l] {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        for &x in &net.biases[l] {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    bin.write_all(&buf)
}

pub fn load_mlp(base: &Path) -> io::Result<Mlp> {
    let sidecar: Sidecar = serde_json::from_str(&fs::read_to_string(base.with_extension("json"))?)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    let mut net = Mlp::zeros(&sidecar.sizes, sidecar.head);
    let mut bin = fs::File::open(base.with_extension("bin"))?;
    let mut bytes = Vec::new();
    bin.read_to_end(&mut bytes)?;
    if bytes.len() != net.param_count() * 4 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!(
                "checkpoint size mismatch: expected {} parameters, file holds {} bytes",
                net.param_count(),
                bytes.len()
            ),
        ));
    }
    let mut it = bytes.chunks_exact(4);
    let mut next = || f32::from_le_bytes(it.next().unwrap().try_into().unwrap());
    for l in 0..net.sizes.len() - 1 {
        for k in 0..net.weights[l].len() {
            net.weights[l][k] = next();
        }
        for k in 0..net.biases[l].len() {
            net.biases[l][k] = next();
        }
    }
    Ok(net)
}
