"""Analysis modules for mh-metrics."""
