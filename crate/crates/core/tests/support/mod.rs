pub mod fixtures;
pub mod oracle;
pub mod qp_oracle;
