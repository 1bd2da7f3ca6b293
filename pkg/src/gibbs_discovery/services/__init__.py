"""Service layer: workflows that combine loading, fitting, estimation and simulation."""

from gibbs_discovery.services.discovery_service import DiscoveryService
from gibbs_discovery.services.simulation_service import SimulationReport, SimulationService

__all__ = ["DiscoveryService", "SimulationReport", "SimulationService"]
