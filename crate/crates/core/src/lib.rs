pub mod error;
pub mod expr;
pub mod forms;
pub mod map;
pub mod poly;
pub mod rootfind;
pub mod spectrum;
pub mod families;
pub mod pcf;
pub mod catalog;

pub mod dd;
mod mp;
mod oracle;
