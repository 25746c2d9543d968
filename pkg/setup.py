from setuptools import setup

setup(
    name="trajectory-repair-toolkit",
    version="1.0",
    description="Trajectory confidence scoring, lost/found zone learning and repair of lost trajectories",
    license="MIT",
    packages=[
        "trajectory_repair_toolkit",
    ],
)
