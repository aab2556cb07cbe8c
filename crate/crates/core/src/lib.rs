pub mod kernel;
pub mod remark;
pub mod dependence;
pub mod validator;
pub mod agent;
pub mod experiment;
pub mod cli;
