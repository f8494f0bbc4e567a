"""Two-stage policy distillation toolkit.

Train or script a high-reward teacher in small environments, distill its
demonstrations into an object-centric graph-network student on top of a
self-supervised object detector, and measure how the student generalizes
to scenes with more objects and unseen backgrounds.
"""

__version__ = "0.1.0"
