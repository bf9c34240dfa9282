"""matroid-kernels: represented matroids, cut covering and randomized kernels."""

__version__ = "0.1.0"
