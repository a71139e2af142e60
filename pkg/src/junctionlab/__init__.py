"""junctionlab: a junction-driving safety laboratory.

Simulates intersection and roundabout scenarios, trains DQN / attention-DQN /
A2C / PPO agents on them, and scores safety via collision, success, freezing,
and total-reward metrics.
"""

__version__ = "0.1.0"
