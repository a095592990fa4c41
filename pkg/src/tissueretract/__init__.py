"""Desk-scale benchmark for autonomous soft-tissue retraction.

A deterministic mass-spring tissue simulator coupled to a 6-DOF arm
kinematics model, three goal-conditioned retraction tasks, a scripted
demonstration generator, and five off-policy agents evaluated by success
rate with confidence intervals.
"""

__version__ = "0.1.0"
