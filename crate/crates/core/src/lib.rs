//! Personalized ranking of open issues for newcomers to a project.
//!
//! The pipeline turns a contribution-history dump into candidate lists
//! ([`corpus`]), featurizes every (candidate issue, newcomer) pair
//! ([`features`], built on [`textprep`] and [`simtext`]), trains a
//! LambdaMART ranker ([`ltr`]) and evaluates it longitudinally ([`eval`]).

pub mod cli;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod ltr;
pub mod simtext;
pub mod textprep;
