//! Reading and writing graph, feature and label files, and the synthetic
//! multi-community citation graph generator.

mod io;
mod synth;

pub use io::{
    load_edges, load_features, load_graph, load_labels, load_matrix, save_edges, save_labels,
    save_matrix, write_atomic, NodeLabel,
};
pub use synth::{generate_synthetic, SynthConfig, SyntheticData};

/// Embedding files share the feature-file format.
pub use io::{load_matrix as load_embeddings, save_matrix as save_embeddings};
