"""Naive Bayes dropout prediction over ARFF student records."""

__version__ = "0.1.0"
