# cogpilot package