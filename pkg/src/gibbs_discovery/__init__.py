"""Discovery probabilities under Gibbs-type priors: estimators, posterior laws, fitting and simulation."""

__version__ = "0.1.0"
