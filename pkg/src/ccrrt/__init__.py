"""Chance-constrained RRT/RRT* planning around Gaussian obstacles."""

from .constraints import Obstacle, ObstacleField, RiskConfig, Workspace, allocate_risk
from .dynamics import GoalRegion, LTIModel, Penalty, lti_step, objective, rollout, single_integrator
from .planner import PlannerParams, PlanResult, Tree, extend, plan, plan_multiagent, verify_path
from .probability import (
    ChiSquareDist,
    Gaussian2D,
    RiskEllipse,
    chi2_cdf,
    chi2_inv,
    mahalanobis_sq,
    pdf,
    risk_ellipse,
)
from .scenario import Scenario, load_scenario
from .svg import render_svg

__version__ = "0.1.0"
