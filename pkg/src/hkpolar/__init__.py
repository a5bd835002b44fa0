"""Polar coding toolkit for the 2-user discrete memoryless interference channel."""

from .channels import (
    Alphabet,
    ChannelFormatError,
    DiscreteChannel,
    InterferenceChannel,
    JointInputDistribution,
    JointModel,
    default_cloud_size,
    dump_channel,
    dump_distribution,
    info,
    load_channel,
    load_distribution,
    synthesize,
)

__all__ = [
    "Alphabet",
    "ChannelFormatError",
    "DiscreteChannel",
    "InterferenceChannel",
    "JointInputDistribution",
    "JointModel",
    "default_cloud_size",
    "dump_channel",
    "dump_distribution",
    "info",
    "load_channel",
    "load_distribution",
    "synthesize",
]
