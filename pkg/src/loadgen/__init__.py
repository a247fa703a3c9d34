"""Multivariate load state generation and adequacy assessment toolkit.

Subpackages:
    dataset     hourly load ingestion, weekly splits, min-max scaling, hour encoding
    nets        dense feed-forward networks with exact backprop and Adam
    cvae        (C)VAE model, output-noise strategies, training and generation
    copula      Gaussian copula baseline generator
    validation  K-S, autoencoder and energy two-sample tests
    qp          balanced-curtailment quadratic program and dual active-set solver
    adequacy    fleet construction, availability sampling, LOLE Monte Carlo
    report      matplotlib figure rendering for emitted reports
    cli         command-line entry points
"""

__version__ = "0.1.0"
