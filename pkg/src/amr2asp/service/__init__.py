from .app import ServiceConfig, app, create_app

__all__ = ["ServiceConfig", "app", "create_app"]
