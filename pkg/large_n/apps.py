from django.apps import AppConfig
from django.utils.module_loading import autodiscover_modules


class LargeNConfig(AppConfig):
    name = "large_n"
    verbose_name = "Large-N energy series"

    def ready(self):
        from large_n import conf
        # Check kinds registered by other apps land in CheckMeta.registry on import
        autodiscover_modules(*conf.check_modules())
