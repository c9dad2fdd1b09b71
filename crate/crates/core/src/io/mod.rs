//! CSV and JSON input/output and feature-engineering transforms.

mod output;
mod table;
mod transform;

pub use output::{
    create_file, dense_labels, prototypes_json, read_state_columns, read_state_columns_from,
    write_json, write_memberships, write_simulated, FitMetrics, StateColumns,
};
pub use table::{
    read_csv, read_csv_from, read_schema, validate_columns, write_table, ColumnKind, ColumnRole,
    ColumnSpec, Table,
};
pub use transform::{
    find_extrema, local_extrema, log_return, relative_phase, rolling_std, run_pipeline, sign_diff,
    Extremum, Pipeline, Sign, TransformOutput, TransformSpec,
};
