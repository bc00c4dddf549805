from django.apps import AppConfig


class PacoConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "paco"
    verbose_name = "PACO patch-consensus restoration"
