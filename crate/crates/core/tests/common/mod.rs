#![allow(dead_code)]

use fsd_core::Document;

pub fn doc(position: u64, tokens: &[&str]) -> Document {
    owned(position, tokens.iter().map(|t| t.to_string()).collect())
}

pub fn owned(position: u64, tokens: Vec<String>) -> Document {
    Document {
        id: format!("d{position}"),
        position,
        timestamp: position as i64,
        tokens,
        topic: None,
    }
}

/// Renumber positions from 1 in slice order.
pub fn stream(token_lists: Vec<Vec<String>>) -> Vec<Document> {
    token_lists
        .into_iter()
        .enumerate()
        .map(|(i, t)| owned(i as u64 + 1, t))
        .collect()
}
