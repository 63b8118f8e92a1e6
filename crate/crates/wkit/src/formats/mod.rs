//! File formats: jets, domains, certificates, atlases and CSV tables.

pub mod atlas;
pub mod certificate;
pub mod domain;
pub mod jet;
pub mod tables;
