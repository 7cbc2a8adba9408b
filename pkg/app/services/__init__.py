# Service layer