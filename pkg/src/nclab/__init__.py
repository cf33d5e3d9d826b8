"""Neural-collapse laboratory.

Trains deep networks with a linear head via full-batch gradient descent with
weight decay, measures the collapse metrics (NC1/NC2/NC3, balancedness,
negativity) and numerically evaluates the theoretical bounds that relate them.
"""

__version__ = "0.1.0"
