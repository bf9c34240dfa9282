# kernels/toolkit/: exact field arithmetic, represented matroids, cuts, and the
# kernelization pipelines built on them. Pure functions over frozen pydantic models.
