"""
领域配置读取
在 Django 未配置时退回默认值，便于在 manage.py 之外直接导入库代码
"""
from django.conf import settings

DEFAULTS = {
    'SCHEMA_VERSION': '1',
    'TABLEAU_SCHEDULE': 'least',
    'AUTO_GUARD': False,
    'SIMPLIFY_INTERPOLANTS': False,
    'MAX_PRODUCT_POSITIONS': 200000,
    'MAX_BALANCE_NODES': 200000,
    'BATCH_JOBS': 1,
}


def focus_setting(name):
    """读取 FOCUS 配置项"""
    if name not in DEFAULTS:
        raise KeyError(f'未知的配置项: {name}')
    if settings.configured:
        return getattr(settings, 'FOCUS', {}).get(name, DEFAULTS[name])
    return DEFAULTS[name]
