"""Forest height regression from multi-baseline polarimetric SAR covariances.

Subpackages and modules:

``sardata``
    Acquisition geometry, SLC stacks, height rasters and their file formats.
``simulator``
    Two-layer scene simulator with speckle and optional phase screens.
``features``
    Windowed covariance estimation and real-valued feature vectors.
``gbdt``
    Histogram gradient boosting with oblivious trees.
``eval``
    Splits, metrics, window sweeps and report files.
"""
__version__ = "0.1.0"
