//! Line-delimited JSON record files.
//!
//! The first line is a [`RecordHeader`]; every following line is one record:
//!
//! ```text
//! {"version":1,"n_qubits":1,"ensemble_in":"pauli","ensemble_out":"pauli","count":2,"seed":7,"channel":"identity"}
//! {"b_in":"0","u_in":"Z","b_out":"0","u_out":"X"}
//! {"b_in":"1","u_in":"Y","b_out":"1","u_out":"Y"}
//! ```
//!
//! Pauli frames are axis strings, Clifford frames are `{"tableau": [...]}`
//! with the integer rows of the tableau, explicit unitaries are
//! `{"re": [...], "im": [...]}` in row-major order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use proc_shadow::ensembles::Axis;
use proc_shadow::{Bits, Clifford, Complex, Ensemble, Frame, Operator, Record, Shadow};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const RECORD_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordHeader {
    pub version: u32,
    pub n_qubits: usize,
    pub ensemble_in: String,
    pub ensemble_out: String,
    pub count: usize,
    pub seed: Option<u64>,
    pub channel: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrameRepr {
    Axes(String),
    Tableau { tableau: Vec<u64> },
    Explicit { re: Vec<f64>, im: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RecordLine {
    b_in: String,
    u_in: FrameRepr,
    b_out: String,
    u_out: FrameRepr,
}

pub fn frame_to_repr(u: &Frame) -> FrameRepr {
    match u {
        Frame::PauliProduct(axes) => FrameRepr::Axes(axes.iter().map(|a| a.as_char()).collect()),
        Frame::Clifford(c) => FrameRepr::Tableau {
            tableau: c.rows().to_vec(),
        },
        Frame::Explicit(op) => FrameRepr::Explicit {
            re: op.entries().iter().map(|z| z.re).collect(),
            im: op.entries().iter().map(|z| z.im).collect(),
        },
    }
}

pub fn frame_from_repr(repr: &FrameRepr, n_qubits: usize) -> std::result::Result<Frame, String> {
    match repr {
        FrameRepr::Axes(s) => s
            .chars()
            .map(|c| Axis::from_char(c).map_err(|e| e.to_string()))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Frame::PauliProduct),
        FrameRepr::Tableau { tableau } => Clifford::from_rows(n_qubits, tableau.clone())
            .map(Frame::Clifford)
            .map_err(|e| e.to_string()),
        FrameRepr::Explicit { re, im } => {
            if re.len() != im.len() {
                return Err("explicit frame has mismatched re/im lengths".into());
            }
            let data = re
                .iter()
                .zip(im)
                .map(|(&a, &b)| Complex::new(a, b))
                .collect();
            Operator::from_vec(n_qubits, data)
                .map(Frame::Explicit)
                .map_err(|e| e.to_string())
        }
    }
}

pub fn header_for(ps: &Shadow, seed: Option<u64>, channel: &str) -> RecordHeader {
    RecordHeader {
        version: RECORD_VERSION,
        n_qubits: ps.n_qubits(),
        ensemble_in: ps.ensemble_in().tag().to_string(),
        ensemble_out: ps.ensemble_out().tag().to_string(),
        count: ps.len(),
        seed,
        channel: channel.to_string(),
    }
}

pub fn write_records<W: Write>(
    mut w: W,
    header: &RecordHeader,
    ps: &Shadow,
) -> std::io::Result<()> {
    writeln!(w, "{}", serde_json::to_string(header)?)?;
    for r in ps.records() {
        let line = RecordLine {
            b_in: r.b_in().to_string(),
            u_in: frame_to_repr(r.u_in()),
            b_out: r.b_out().to_string(),
            u_out: frame_to_repr(r.u_out()),
        };
        writeln!(w, "{}", serde_json::to_string(&line)?)?;
    }
    w.flush()
}

pub fn save_records(path: &Path, header: &RecordHeader, ps: &Shadow) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_records(BufWriter::new(file), header, ps).map_err(|e| HarnessError::io(path, e))
}

/// Reads a record file, reporting malformed content with its 1-based line.
pub fn load_records(path: &Path) -> Result<(RecordHeader, Shadow)> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let bad = |line: usize, message: String| HarnessError::Records {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| bad(1, "empty record file".into()))?
        .map_err(|e| HarnessError::io(path, e))?;
    let header: RecordHeader = serde_json::from_str(&first).map_err(|e| bad(1, e.to_string()))?;
    if header.version != RECORD_VERSION {
        return Err(HarnessError::Version {
            expected: RECORD_VERSION,
            found: header.version,
        });
    }
    let ens_in: Ensemble = header
        .ensemble_in
        .parse()
        .map_err(|e: proc_shadow::ShadowError| bad(1, e.to_string()))?;
    let ens_out: Ensemble = header
        .ensemble_out
        .parse()
        .map_err(|e: proc_shadow::ShadowError| bad(1, e.to_string()))?;
    let n = header.n_qubits;

    let mut records = Vec::with_capacity(header.count);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(|e| HarnessError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: RecordLine =
            serde_json::from_str(&line).map_err(|e| bad(lineno, e.to_string()))?;
        let b_in: Bits = parsed
            .b_in
            .parse()
            .map_err(|e: proc_shadow::ShadowError| bad(lineno, e.to_string()))?;
        let b_out: Bits = parsed
            .b_out
            .parse()
            .map_err(|e: proc_shadow::ShadowError| bad(lineno, e.to_string()))?;
        let u_in = frame_from_repr(&parsed.u_in, n).map_err(|m| bad(lineno, m))?;
        let u_out = frame_from_repr(&parsed.u_out, n).map_err(|m| bad(lineno, m))?;
        let record = Record::new(b_in, u_in, u_out, b_out, ens_in, ens_out)
            .map_err(|e| bad(lineno, e.to_string()))?;
        if record.n_qubits() != n {
            return Err(bad(
                lineno,
                format!("record has {} qubits, header says {n}", record.n_qubits()),
            ));
        }
        records.push(record);
    }
    if records.len() != header.count {
        return Err(bad(
            records.len() + 2,
            format!(
                "header announces {} records, found {}",
                header.count,
                records.len()
            ),
        ));
    }
    let ps = Shadow::new(n, ens_in, ens_out, records)?;
    Ok((header, ps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proc_shadow::rng::stream;
    use proc_shadow::{acquire_process_shadow, Channel};

    #[test]
    fn frames_round_trip() {
        let mut rng = stream(1, 0);
        for ens in [Ensemble::PauliProduct, Ensemble::Clifford] {
            let u: Frame = proc_shadow::ensembles::sample_frame(ens, 2, &mut rng).unwrap();
            let json = serde_json::to_string(&frame_to_repr(&u)).unwrap();
            let back: FrameRepr = serde_json::from_str(&json).unwrap();
            assert_eq!(frame_from_repr(&back, 2).unwrap(), u);
        }
        let explicit = Frame::Explicit(Operator::identity(1));
        assert_eq!(
            frame_from_repr(&frame_to_repr(&explicit), 1).unwrap(),
            explicit
        );
    }

    #[test]
    fn in_memory_round_trip() {
        let ch = Channel::<f64>::identity(1);
        let ps = acquire_process_shadow(
            &ch,
            Ensemble::Clifford,
            Ensemble::PauliProduct,
            5,
            &mut stream(2, 0),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &header_for(&ps, Some(2), "identity"), &ps).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.lines().nth(1).unwrap().contains("tableau"));
    }
}
