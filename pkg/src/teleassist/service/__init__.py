"""Live teleoperation service: FastAPI app, session engine, wire schemas."""
