# Data models