//! Novelty CSV: `position,doc_id,novelty,nearest_id,raw_similarity,bias_factor,early_stop`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::NoveltyRecord;

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    position: u64,
    doc_id: String,
    novelty: f64,
    nearest_id: Option<String>,
    raw_similarity: f64,
    bias_factor: f64,
    early_stop: bool,
}

pub fn write_records<W: Write>(out: W, records: &[NoveltyRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(Row {
            position: r.position,
            doc_id: r.doc_id.clone(),
            novelty: r.novelty,
            nearest_id: r.nearest_id.clone(),
            raw_similarity: r.raw_similarity,
            bias_factor: r.bias_factor,
            early_stop: r.early_stop,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Read records back. The zero-vector flag is not part of the CSV and is
/// restored as `false`.
pub fn read_records<R: Read>(input: R) -> Result<Vec<NoveltyRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let row: Row = row?;
        out.push(NoveltyRecord {
            doc_id: row.doc_id,
            position: row.position,
            novelty: row.novelty,
            nearest_id: row.nearest_id.filter(|s| !s.is_empty()),
            raw_similarity: row.raw_similarity,
            bias_factor: row.bias_factor,
            early_stop: row.early_stop,
            zero_vector: false,
        });
    }
    Ok(out)
}
