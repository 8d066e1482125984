from django.apps import AppConfig


class MucalcConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'mucalc'
    verbose_name = '模态 μ 演算'
