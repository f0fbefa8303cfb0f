"""
App configuration for GeoDubins
"""
from django.apps import AppConfig


class GeodubinsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'geodubins'
    verbose_name = 'GeoDubins'

    def ready(self):
        """Initialize app"""
        import logging
        logger = logging.getLogger(__name__)
        logger.info("GeoDubins App initialized")
