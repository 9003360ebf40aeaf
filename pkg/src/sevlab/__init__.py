"""Imbalanced crash-severity classification lab.

Modules: ``tabular`` (data model, encoding, splitting), ``synthgen``
(synthetic data from per-class marginals), ``featsel``, ``balance``,
``models``, ``metrics``, ``experiment`` and ``cli``.
"""

__version__ = "0.1.0"
