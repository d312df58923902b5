//! Gaussian-mixture push baseline with Gibbs-sampled mixture products.

pub mod gibbs;
pub mod gmm;
pub mod push;

pub use gibbs::{gibbs_labels, gibbs_product_sample, LabelVector};
pub use gmm::{
    exact_mixture_product, exact_mixture_product_capped, gaussian_product, kde_fit, mixture_pdf, Component,
    GaussianMixture, GaussianProduct,
};
pub use push::{
    mixture_belief, push_message_update, run_push_inference, PushConfig, PushEngine, PushInputs, DEFAULT_SWEEPS,
};
