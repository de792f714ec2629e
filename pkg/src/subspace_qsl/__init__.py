from .client import Client
from .operators import Frame, HermitianOperator, Projector, StateVector
