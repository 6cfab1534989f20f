//! Image containers, attack corpora and their on-disk formats.

mod idx;
mod lwc;
mod manifest;
mod pbox;
mod pgm;
mod split;

pub use idx::{
    labels_to_bytes, parse_idx_images, parse_idx_labels, read_idx, read_idx_labels, read_maybe_gz,
    write_idx, write_idx_labels, write_maybe_gz, IdxImages, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC,
};
pub use lwc::{
    build_katan_corpus, build_simon_corpus, lwc_file_bytes, parse_lwc_file, verify_manifest, CipherId,
    KatanRecord, LwcCorpus, LwcRecord, SimonRecord, KATAN_TRAIN, KATAN_VAL, LWC_MAGIC, SIMON_TEST,
    SIMON_TRAIN, SIMON_VAL,
};
pub use manifest::{digest_parts, Counts, DatasetManifest};
pub use pbox::{build_pbox_corpus, PboxCorpus};
pub use pgm::{grid, pgm_bytes, write_pgm};
pub use split::shuffle_split;
