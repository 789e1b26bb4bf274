//! Agricultural advisory engine: knowledge-base ingestion, vector retrieval,
//! the multilingual question-answering pipeline, the conversation log and
//! the analytics computed over it.

pub mod analytics;
pub mod config;
pub mod index;
pub mod kb;
pub mod lexicon;
pub mod pipeline;
pub mod provider;
pub mod store;
pub mod text;
