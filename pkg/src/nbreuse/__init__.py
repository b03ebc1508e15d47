"""nbreuse: slice notebooks into executable components, retrieve them by
used columns, and generate runnable EDA notebooks."""

__version__ = "0.1.0"
