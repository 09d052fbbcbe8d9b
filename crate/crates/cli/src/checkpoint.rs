//! Checkpoint directories.
//!
//! Every matrix is stored in its own file: one text header line
//! `admm-embed v1<TAB>role<TAB>rows<TAB>dim`, then `rows·dim` little-endian
//! IEEE-754 `f32` values in row-major order. Each embedding table has a
//! companion `.vocab` file holding one token per line (line k = row k).
//! `meta.txt` records the shapes needed to rebuild the parameter bundles.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use admm_embed_core::admm::AdmmState;
use admm_embed_core::distributional::NlmParams;
use admm_embed_core::relational::{
    GdParams, Nonlinearity, NtnParams, RelationalObjective, TransEParams, TripleScorer,
};
use admm_embed_core::{EmbeddingTable, Role, Vocabulary};

use crate::error::{Error, Result};

pub const MAGIC: &str = "admm-embed v1";

/// A matrix as stored on disk, widened back to `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredMatrix {
    pub role: String,
    pub rows: usize,
    pub dim: usize,
    pub data: Vec<f64>,
}

pub fn write_matrix(path: &Path, role: &str, rows: usize, dim: usize, data: &[f64]) -> Result<()> {
    if data.len() != rows * dim {
        return Err(Error::format(path, format!("{} values for a {rows}x{dim} matrix", data.len())));
    }
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "{MAGIC}\t{role}\t{rows}\t{dim}").map_err(io)?;
    for &x in data {
        out.write_all(&(x as f32).to_le_bytes()).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_header<R: BufRead>(reader: &mut R, path: &Path) -> Result<(String, usize, usize)> {
    let mut header = String::new();
    reader.read_line(&mut header).map_err(|e| Error::io(path, e))?;
    let fields: Vec<&str> = header.trim_end_matches('\n').split('\t').collect();
    match fields.as_slice() {
        [magic, role, rows, dim] if *magic == MAGIC => {
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::format(path, format!("bad header number `{s}`")))
            };
            Ok((role.to_string(), parse(rows)?, parse(dim)?))
        }
        _ => Err(Error::format(path, "missing `admm-embed v1` header")),
    }
}

pub fn read_matrix(path: &Path) -> Result<StoredMatrix> {
    let mut reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let (role, rows, dim) = read_header(&mut reader, path)?;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    if bytes.len() != rows * dim * 4 {
        return Err(Error::format(
            path,
            format!("expected {} bytes of data, found {}", rows * dim * 4, bytes.len()),
        ));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])))
        .collect();
    Ok(StoredMatrix { role, rows, dim, data })
}

fn expect_role(m: StoredMatrix, role: &str, path: &Path) -> Result<StoredMatrix> {
    if m.role != role {
        return Err(Error::format(path, format!("expected role `{role}`, found `{}`", m.role)));
    }
    Ok(m)
}

pub fn write_vocab(path: &Path, vocab: &Vocabulary) -> Result<()> {
    let mut text = String::new();
    for w in vocab.words() {
        text.push_str(w);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_vocab(path: &Path) -> Result<Vocabulary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Vocabulary::from_words(text.lines()).map_err(|e| Error::format(path, e.to_string()))
}

fn write_table(dir: &Path, name: &str, table: &EmbeddingTable, vocab: &Vocabulary) -> Result<()> {
    write_matrix(
        &dir.join(format!("{name}.bin")),
        table.role().as_str(),
        table.rows(),
        table.dim(),
        table.as_slice(),
    )?;
    write_vocab(&dir.join(format!("{name}.vocab")), vocab)
}

fn read_table(dir: &Path, name: &str, role: Role) -> Result<(Vocabulary, EmbeddingTable)> {
    let path = dir.join(format!("{name}.bin"));
    let m = expect_role(read_matrix(&path)?, role.as_str(), &path)?;
    let vocab = read_vocab(&dir.join(format!("{name}.vocab")))?;
    if vocab.len() != m.rows {
        return Err(Error::format(
            &path,
            format!("{} rows but {} vocabulary entries", m.rows, vocab.len()),
        ));
    }
    Ok((vocab, EmbeddingTable::from_rows(role, m.dim, m.data)?))
}

/// Everything restored from a checkpoint directory.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub meta: BTreeMap<String, String>,
    pub w: Option<(Vocabulary, EmbeddingTable)>,
    pub v: Option<(Vocabulary, EmbeddingTable)>,
    pub y: Option<(Vocabulary, EmbeddingTable)>,
    pub nlm: Option<NlmParams>,
    pub objective: Option<RelationalObjective>,
    pub relations: Option<Vocabulary>,
}

fn nonlinearity_name(n: Nonlinearity) -> &'static str {
    match n {
        Nonlinearity::Sigmoid => "sigmoid",
        Nonlinearity::Tanh => "tanh",
    }
}

/// Writes every table and parameter bundle present in `state`.
pub fn save(dir: &Path, state: &AdmmState, mode: &str, relations: Option<&Vocabulary>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut meta = BTreeMap::new();
    meta.insert("format", MAGIC.to_string());
    meta.insert("mode", mode.to_string());
    meta.insert("iteration", state.iteration().to_string());

    if let Some(d) = &state.distributional {
        write_table(dir, "w", &d.w, &d.vocab)?;
        let p = &d.params;
        meta.insert("dim", p.dim.to_string());
        meta.insert("context", p.context.to_string());
        meta.insert("nlm_hidden", p.hidden.to_string());
        write_matrix(&dir.join("nlm.A.bin"), "nlm.A", p.hidden, p.input_len(), &p.a)?;
        write_matrix(&dir.join("nlm.b.bin"), "nlm.b", 1, p.hidden, &p.b)?;
        write_matrix(&dir.join("nlm.u.bin"), "nlm.u", 1, p.hidden, &p.u)?;
    }
    if let Some(r) = &state.relational {
        write_table(dir, "v", &r.v, &r.vocab)?;
        meta.insert("dim", r.v.dim().to_string());
        meta.insert("objective", r.objective.name().to_string());
        match &r.objective {
            RelationalObjective::GraphDistance(p) => {
                write_matrix(&dir.join("gd.bin"), "gd", 1, 2, &[p.a, p.b])?;
            }
            RelationalObjective::TransE(p) => {
                write_matrix(&dir.join("transe.R.bin"), "transe.R", p.num_relations(), r.v.dim(), p.as_slice())?;
            }
            RelationalObjective::Ntn(p) => {
                meta.insert("ntn_hidden", p.hidden().to_string());
                meta.insert("nonlinearity", nonlinearity_name(p.nonlinearity()).to_string());
                write_matrix(
                    &dir.join("ntn.blocks.bin"),
                    "ntn.blocks",
                    p.num_relations(),
                    p.relation_block_len(),
                    p.blocks(),
                )?;
                write_matrix(&dir.join("ntn.u.bin"), "ntn.u", 1, p.hidden(), p.u())?;
            }
        }
        if let Some(rels) = relations {
            write_vocab(&dir.join("relations.txt"), rels)?;
        }
    }
    if let Some(y) = &state.duals {
        let shared = Vocabulary::from_words(state.shared_words())?;
        write_table(dir, "y", y, &shared)?;
    }
    let mut text = String::new();
    for (k, v) in &meta {
        text.push_str(&format!("{k} = {v}\n"));
    }
    let path = dir.join("meta.txt");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn meta_usize(meta: &BTreeMap<String, String>, key: &str, dir: &Path) -> Result<usize> {
    meta.get(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::format(&dir.join("meta.txt"), format!("missing or bad `{key}`")))
}

pub fn load(dir: &Path) -> Result<Checkpoint> {
    let meta_path = dir.join("meta.txt");
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: BTreeMap<String, String> = text
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect();
    if meta.get("format").map(String::as_str) != Some(MAGIC) {
        return Err(Error::format(&meta_path, "not an admm-embed v1 checkpoint"));
    }
    let exists = |name: &str| dir.join(name).exists();

    let w = if exists("w.bin") { Some(read_table(dir, "w", Role::Distributional)?) } else { None };
    let v = if exists("v.bin") { Some(read_table(dir, "v", Role::Relational)?) } else { None };
    let y = if exists("y.bin") { Some(read_table(dir, "y", Role::Dual)?) } else { None };

    let nlm = if w.is_some() {
        let context = meta_usize(&meta, "context", dir)?;
        let dim = meta_usize(&meta, "dim", dir)?;
        let hidden = meta_usize(&meta, "nlm_hidden", dir)?;
        let mut p = NlmParams::zeros(context, dim, hidden);
        for (name, slot) in [("nlm.A", &mut p.a), ("nlm.b", &mut p.b), ("nlm.u", &mut p.u)] {
            let path = dir.join(format!("{name}.bin"));
            let m = expect_role(read_matrix(&path)?, name, &path)?;
            if m.data.len() != slot.len() {
                return Err(Error::format(&path, "shape disagrees with meta.txt"));
            }
            *slot = m.data;
        }
        Some(p)
    } else {
        None
    };

    let objective = match meta.get("objective").map(String::as_str) {
        None => None,
        Some("gd") => {
            let path = dir.join("gd.bin");
            let m = expect_role(read_matrix(&path)?, "gd", &path)?;
            Some(RelationalObjective::GraphDistance(GdParams { a: m.data[0], b: m.data[1] }))
        }
        Some("transe") => {
            let path = dir.join("transe.R.bin");
            let m = expect_role(read_matrix(&path)?, "transe.R", &path)?;
            Some(RelationalObjective::TransE(TransEParams::from_vectors(m.dim, m.data)?))
        }
        Some("ntn") => {
            let dim = meta_usize(&meta, "dim", dir)?;
            let hidden = meta_usize(&meta, "ntn_hidden", dir)?;
            let nonlinearity = match meta.get("nonlinearity").map(String::as_str) {
                Some("tanh") => Nonlinearity::Tanh,
                _ => Nonlinearity::Sigmoid,
            };
            let bp = dir.join("ntn.blocks.bin");
            let blocks = expect_role(read_matrix(&bp)?, "ntn.blocks", &bp)?;
            let up = dir.join("ntn.u.bin");
            let u = expect_role(read_matrix(&up)?, "ntn.u", &up)?;
            Some(RelationalObjective::Ntn(NtnParams::from_parts(dim, hidden, blocks.data, u.data, nonlinearity)?))
        }
        Some(other) => return Err(Error::format(&meta_path, format!("unknown objective `{other}`"))),
    };
    let relations = if exists("relations.txt") {
        Some(read_vocab(&dir.join("relations.txt"))?)
    } else {
        None
    };
    Ok(Checkpoint { meta, w, v, y, nlm, objective, relations })
}

/// Human-readable summary: `meta.txt` entries, then every matrix header.
pub fn describe(dir: &Path) -> Result<String> {
    let meta_path = dir.join("meta.txt");
    let mut out = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let mut names: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .filter(|n| n.ends_with(".bin"))
        .collect();
    names.sort();
    for name in names {
        let path = dir.join(&name);
        let mut reader = BufReader::new(File::open(&path).map_err(|e| Error::io(&path, e))?);
        let (role, rows, dim) = read_header(&mut reader, &path)?;
        out.push_str(&format!("{name}: {role} {rows}x{dim}\n"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_payload_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.bin");
        write_matrix(&path, "w", 2, 3, &[1.0, -2.0, 0.5, 0.0, 3.25, -0.125]).unwrap();
        let bytes = fs::read(&path).unwrap();
        let header = b"admm-embed v1\tw\t2\t3\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len(), header.len() + 24);
        assert_eq!(&bytes[header.len()..header.len() + 4], &1.0f32.to_le_bytes());
        assert_eq!(&bytes[header.len() + 4..header.len() + 8], &(-2.0f32).to_le_bytes());
        let m = read_matrix(&path).unwrap();
        assert_eq!((m.rows, m.dim), (2, 3));
        assert_eq!(m.data[4], 3.25);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.bin");
        write_matrix(&path, "v", 1, 2, &[1.0, 2.0]).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes.pop();
        fs::write(&path, bytes).unwrap();
        assert!(matches!(read_matrix(&path), Err(Error::Format { .. })));
    }
}
